//! The figure-producing subcommands.

use std::f64::consts::LN_10;
use std::path::{Path, PathBuf};

use fbm_netcalc::bounds::{
    asymptotic_backlog_at_epsilon, asymptotic_epsilon, closed_form_epsilon, ebb_backlog_violation,
    fbm_backlog_at_epsilon, fbm_backlog_violation,
};
use fbm_netcalc::envelope::{
    fbm_pointwise_envelope, fbm_sample_path_envelope, pointwise_bound, pointwise_exact, pointwise_partial_sums,
    sample_path_epsilon,
};
use fbm_netcalc::netcalc::{e2e_delay_at_epsilon, e2e_delay_violation, CrossTraffic, TandemScenario, ThroughTraffic};
use fbm_netcalc::sim::{envelope_violation_mc, MAX_SLOT_BUDGET};
use fbm_netcalc::traffic::FbmTraffic;
use fbm_netcalc::units::SlotDuration;
use rayon::prelude::*;

use crate::config::{config_err, positive_rate, Dimension, ScenarioConfig, TrafficBlock, TrafficKind};
use crate::output::{emit, num, write_atomic, Plot, Series, Table};
use crate::CliError;

/// Two-sided level of the confidence bands, the mass outside ±3σ.
const BAND_ALPHA: f64 = 0.0027;

pub struct Run<'a> {
    pub cfg: &'a ScenarioConfig,
    pub out: &'a Path,
    pub stem: String,
    pub seed: u64,
    pub trials: Option<u64>,
}

impl Run<'_> {
    fn title(&self, default: &str) -> String {
        self.cfg.title.clone().unwrap_or_else(|| default.to_string())
    }
}

fn check_probability(key: &str, p: f64) -> Result<(), CliError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{key} = {p} must lie in (0, 1)")))
    }
}

fn expect_variable(cfg: &ScenarioConfig, allowed: &[&str]) -> Result<String, CliError> {
    let v = cfg.sweep()?.variable.clone();
    if allowed.contains(&v.as_str()) {
        Ok(v)
    } else {
        Err(CliError::Config(format!("sweep.variable = {v:?}; expected one of {allowed:?}")))
    }
}

/// Fails with the first error when no sweep point could be computed.
fn require_some(statuses: &[String]) -> Result<(), CliError> {
    if !statuses.is_empty() && statuses.iter().all(|s| s != "ok") {
        return Err(CliError::Infeasible(statuses[0].clone()));
    }
    for s in statuses.iter().filter(|s| *s != "ok") {
        log::warn!("{s}");
    }
    Ok(())
}

/// Status cell: the message without commas so plain CSV readers stay happy.
fn status(e: impl std::fmt::Display) -> String {
    e.to_string().replace(',', ";")
}

/// `log10` of a violation bound, capped at probability one.
fn log10_prob(ln_eps: f64) -> f64 {
    ln_eps.min(0.0) / LN_10
}

fn prob(eps: f64) -> f64 {
    eps.min(1.0)
}

pub fn envelope(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.cfg;
    let slot = cfg.slot()?;
    let t = cfg.traffic()?.fbm(&slot)?;
    let env = cfg.section(&cfg.envelope, "[envelope]")?;
    check_probability("envelope.eta", env.eta)?;
    let betas = if env.betas.is_empty() { vec![0.0] } else { env.betas.clone() };
    for &b in &betas {
        if !(b >= 0.0 && b < 1.0 - t.hurst()) {
            return Err(CliError::Config(format!("envelope.betas: {b} outside [0, 1 − H)")));
        }
    }
    expect_variable(cfg, &["t"])?;
    let times = cfg.sweep()?.points(Dimension::Time, &slot)?;

    let mut env_tab = Table::new(std::iter::once("t_slots".to_string()).chain(betas.iter().map(|b| format!("E_beta={b}_bits"))));
    let mut eps_tab = Table::new(std::iter::once("t_slots".to_string()).chain(betas.iter().map(|b| format!("eps_p_beta={b}"))));
    for &time in &times {
        let mut e_row = vec![num(time)];
        let mut p_row = vec![num(time)];
        for &b in &betas {
            let e = if b == 0.0 {
                fbm_pointwise_envelope(&t, env.eta, time)
            } else {
                fbm_sample_path_envelope(&t, b, env.eta, time)
            }
            .map_err(|e| config_err("envelope", e))?;
            e_row.push(num(e));
            p_row.push(num(pointwise_bound(b, env.eta, time).map_err(|e| config_err("envelope", e))?));
        }
        env_tab.push(e_row);
        eps_tab.push(p_row);
    }
    let series = || -> Vec<Series> {
        betas
            .iter()
            .enumerate()
            .map(|(i, b)| Series::column(1, i + 2, format!("beta = {b}")))
            .collect()
    };
    let mut files = emit(
        run.out,
        &run.stem,
        &env_tab,
        &Plot {
            title: run.title("fBm envelopes"),
            xlabel: "t [slots]".into(),
            ylabel: "E(t) [bits]".into(),
            series: series(),
            ..Plot::default()
        },
    )?;
    files.extend(emit(
        run.out,
        &format!("{}_overflow", run.stem),
        &eps_tab,
        &Plot {
            title: run.title("point-wise overflow probability"),
            xlabel: "t [slots]".into(),
            ylabel: "eps_p(t)".into(),
            logy: true,
            series: series(),
            ..Plot::default()
        },
    )?);
    Ok(files)
}

pub fn backlog(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.cfg;
    let slot = cfg.slot()?;
    let c = cfg.capacity()?;
    let t = cfg.traffic()?.fbm(&slot)?;
    let eps_target = cfg.backlog.as_ref().map(|b| b.epsilon).unwrap_or(1e-9);
    check_probability("backlog.epsilon", eps_target)?;
    let var = expect_variable(cfg, &["b", "mean", "sigma", "capacity", "hurst", "sources"])?;
    if var == "b" {
        return backlog_curve(run, c, &t, eps_target, &slot);
    }

    let dim = match var.as_str() {
        "mean" | "sigma" | "capacity" => Dimension::Rate,
        "sources" => Dimension::Count,
        _ => Dimension::Plain,
    };
    let xs = cfg.sweep()?.points(dim, &slot)?;
    let (col, label) = match var.as_str() {
        "mean" => ("mean_Gbps", "mean rate [Gb/s]"),
        "sigma" => ("sigma_Gbps", "standard deviation [Gb/s]"),
        "capacity" => ("capacity_Gbps", "capacity [Gb/s]"),
        "sources" => ("sources", "multiplexed flows m"),
        _ => ("hurst", "Hurst parameter H"),
    };
    let mut tab = Table::new([col, "b_rigorous_bits", "b_asymptotic_bits", "beta_opt", "status"]);
    let mut statuses = Vec::new();
    for &x in &xs {
        let point = (|| -> Result<(f64, FbmTraffic, f64), fbm_netcalc::Error> {
            Ok(match var.as_str() {
                "mean" => (slot.bits_per_slot_to_gbps(x), FbmTraffic::new(x, t.sigma(), t.hurst())?, c),
                "sigma" => (slot.bits_per_slot_to_gbps(x), FbmTraffic::new(t.mean_rate(), x, t.hurst())?, c),
                "capacity" => (slot.bits_per_slot_to_gbps(x), t, x),
                "sources" => (x, t.multiplexed(x as usize)?, c),
                _ => (x, FbmTraffic::new(t.mean_rate(), t.sigma(), x)?, c),
            })
        })();
        let (shown, row) = match point {
            Err(e) => (x, Err(e)),
            Ok((shown, tr, cap)) => (
                shown,
                fbm_backlog_at_epsilon(cap, &tr, eps_target)
                    .and_then(|r| Ok((r, asymptotic_backlog_at_epsilon(cap, &tr, eps_target)?))),
            ),
        };
        match row {
            Ok((r, asym)) => {
                tab.push(vec![num(shown), num(r.b), num(asym), num(r.beta_opt), "ok".into()]);
                statuses.push("ok".into());
            }
            Err(e) => {
                let s = status(format!("{var} = {shown}: {e}"));
                tab.push(vec![num(shown), num(f64::NAN), num(f64::NAN), num(f64::NAN), s.clone()]);
                statuses.push(s);
            }
        }
    }
    require_some(&statuses)?;
    emit(
        run.out,
        &run.stem,
        &tab,
        &Plot {
            title: run.title(&format!("backlog bound at eps = {eps_target}")),
            xlabel: label.into(),
            ylabel: "b [bits]".into(),
            logy: var == "hurst",
            points: true,
            series: vec![Series::column(1, 2, "rigorous"), Series::column(1, 3, "asymptotic")],
            ..Plot::default()
        },
    )
}

fn backlog_curve(run: &Run, c: f64, t: &FbmTraffic, eps_target: f64, slot: &SlotDuration) -> Result<Vec<PathBuf>, CliError> {
    let bs = run.cfg.sweep()?.points(Dimension::Data, slot)?;
    let mut tab = Table::new([
        "b_bits",
        "eps_rigorous",
        "eps_asymptotic",
        "eps_closed_form",
        "beta_opt",
        "tau_star_slots",
        "status",
    ]);
    let mut statuses = Vec::new();
    for &b in &bs {
        let row = fbm_backlog_violation(c, t, b).and_then(|r| {
            Ok((r, asymptotic_epsilon(c, t, b)?, closed_form_epsilon(c, t, b)?))
        });
        match row {
            Ok((r, a, cf)) => {
                tab.push(vec![
                    num(b),
                    num(prob(r.epsilon)),
                    num(prob(a)),
                    num(prob(cf)),
                    num(r.beta_opt),
                    num(r.tau_star),
                    "ok".into(),
                ]);
                statuses.push("ok".into());
            }
            Err(e) => {
                let s = status(format!("b = {b}: {e}"));
                let mut r = vec![num(b)];
                r.extend(std::iter::repeat_n(num(f64::NAN), 5));
                r.push(s.clone());
                tab.push(r);
                statuses.push(s);
            }
        }
    }
    require_some(&statuses)?;
    let mut files = emit(
        run.out,
        &run.stem,
        &tab,
        &Plot {
            title: run.title("backlog bound"),
            xlabel: "b [bits]".into(),
            ylabel: "P[B > b]".into(),
            logy: true,
            series: vec![
                Series::column(1, 2, "rigorous"),
                Series::column(1, 3, "asymptotic"),
                Series::column(1, 4, "closed form"),
            ],
            ..Plot::default()
        },
    )?;

    let rig = fbm_backlog_at_epsilon(c, t, eps_target).map_err(|e| CliError::Infeasible(e.to_string()))?;
    let asym = asymptotic_backlog_at_epsilon(c, t, eps_target).map_err(|e| CliError::Infeasible(e.to_string()))?;
    let mut factor = Table::new(["epsilon", "b_rigorous_bits", "b_asymptotic_bits", "factor"]);
    factor.push(vec![num(eps_target), num(rig.b), num(asym), num(rig.b / asym)]);
    log::info!("rigorous/asymptotic backlog at eps = {eps_target}: {:.4}", rig.b / asym);
    files.push(write_atomic(run.out, &format!("{}_factor.csv", run.stem), &factor.to_csv()?)?);
    Ok(files)
}

pub fn tail_compare(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.cfg;
    let slot = cfg.slot()?;
    let c = cfg.capacity()?;
    expect_variable(cfg, &["b"])?;
    let bs = cfg.sweep()?.points(Dimension::Data, &slot)?;
    let tail = cfg.tail.clone();

    let mut fbm: Vec<(f64, FbmTraffic)> = Vec::new();
    if let Some(block) = &cfg.traffic {
        let hs = match &tail {
            Some(tb) if !tb.hurst.is_empty() => tb.hurst.clone(),
            _ => vec![block.hurst.ok_or_else(|| CliError::Config("fbm traffic needs `hurst`".into()))?],
        };
        for h in hs {
            fbm.push((h, block.with_hurst(h).fbm(&slot)?));
        }
    }
    let mut ebb = Vec::new();
    if let Some(block) = &cfg.ebb {
        let ts = match &tail {
            Some(tb) if !tb.burstiness.is_empty() => tb.burstiness.clone(),
            _ => vec![block
                .burstiness
                .ok_or_else(|| CliError::Config("ebb traffic needs `burstiness`".into()))?],
        };
        for bt in ts {
            ebb.push((bt, block.with_burstiness(bt).ebb(&slot)?));
        }
    }
    if fbm.is_empty() && ebb.is_empty() {
        return Err(CliError::Config("tail-compare needs [traffic] (fbm) and/or [ebb]".into()));
    }

    let mut header = vec!["b_bits".to_string()];
    header.extend(fbm.iter().map(|(h, _)| format!("log10_eps_fbm_H={h}")));
    header.extend(ebb.iter().map(|(bt, _)| format!("log10_eps_ebb_T={bt}")));
    header.extend(ebb.iter().map(|(bt, _)| format!("theta_opt_ebb_T={bt}_per_bit")));
    let mut tab = Table::new(header);
    let mut computed = 0usize;
    let mut first_err = None;
    for &b in &bs {
        let mut row = vec![num(b)];
        for (h, t) in &fbm {
            row.push(match fbm_backlog_violation(c, t, b) {
                Ok(r) => {
                    computed += 1;
                    num(log10_prob(r.ln_epsilon))
                }
                Err(e) => {
                    log::warn!("fbm H = {h}, b = {b}: {e}");
                    first_err.get_or_insert(e.to_string());
                    num(f64::NAN)
                }
            });
        }
        let mut thetas = Vec::new();
        for (bt, a) in &ebb {
            match ebb_backlog_violation(c, a, b) {
                Ok(r) => {
                    computed += 1;
                    row.push(num(log10_prob(r.ln_epsilon)));
                    thetas.push(num(r.theta_opt));
                }
                Err(e) => {
                    log::warn!("ebb T = {bt}, b = {b}: {e}");
                    first_err.get_or_insert(e.to_string());
                    row.push(num(f64::NAN));
                    thetas.push(num(f64::NAN));
                }
            }
        }
        row.extend(thetas);
        tab.push(row);
    }
    if computed == 0 {
        return Err(CliError::Infeasible(first_err.unwrap_or_default()));
    }
    let mut series: Vec<Series> = fbm
        .iter()
        .enumerate()
        .map(|(i, (h, _))| Series::column(1, i + 2, format!("fBm H = {h}")))
        .collect();
    series.extend(
        ebb.iter()
            .enumerate()
            .map(|(i, (bt, _))| Series::column(1, fbm.len() + i + 2, format!("EBB T = {bt}"))),
    );
    emit(
        run.out,
        &run.stem,
        &tab,
        &Plot {
            title: run.title("backlog tail: fBm vs EBB"),
            xlabel: "b [bits]".into(),
            ylabel: "log10 P[B > b]".into(),
            series,
            ..Plot::default()
        },
    )
}

fn apply_search(cfg: &ScenarioConfig, slot: &SlotDuration, sc: &mut TandemScenario) -> Result<(), CliError> {
    if let Some(r) = &cfg.search.r_cr {
        sc.search.r_cr = Some(positive_rate(slot, r, "search.r_cr")?);
    }
    if let Some(d) = &cfg.search.delta {
        sc.search.delta = Some(positive_rate(slot, d, "search.delta")?);
    }
    Ok(())
}

fn through_label(blocks: &[TrafficBlock], i: usize) -> String {
    let kind = blocks[i].kind;
    let dup = blocks.iter().filter(|b| b.kind == kind).count() > 1;
    if dup {
        format!("{}{}", kind.name(), i + 1)
    } else {
        kind.name().to_string()
    }
}

pub fn delay(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.cfg;
    let slot = cfg.slot()?;
    let c = cfg.capacity()?;
    let cross_block = cfg.section(&cfg.cross, "[cross]")?;
    if cross_block.kind != TrafficKind::Fbm {
        return Err(CliError::Config("delay sweeps the Hurst parameter of fbm cross traffic".into()));
    }
    if cfg.through.is_empty() {
        return Err(CliError::Config("missing [[through]]".into()));
    }
    let throughs: Vec<ThroughTraffic> = cfg.through.iter().map(|b| b.as_through(&slot)).collect::<Result<_, _>>()?;
    let d_text = &cfg.section(&cfg.delay, "[delay]")?.delay;
    let d = slot.parse_duration(d_text).map_err(|e| config_err("delay.delay", e))?;
    if !(d > 0.0) {
        return Err(CliError::Config(format!("delay.delay must be positive, got {d_text:?}")));
    }
    expect_variable(cfg, &["hurst"])?;
    let hs = cfg.sweep()?.points(Dimension::Plain, &slot)?;
    let crosses: Vec<CrossTraffic> = hs
        .iter()
        .map(|&h| cross_block.with_hurst(h).as_cross(&slot))
        .collect::<Result<_, _>>()?;

    let mut header = vec!["H_cr".to_string()];
    header.extend((0..throughs.len()).map(|i| format!("log10_eps_{}", through_label(&cfg.through, i))));
    let mut tab = Table::new(header);
    let cells: Vec<Vec<Result<f64, String>>> = crosses
        .par_iter()
        .map(|cross| {
            throughs
                .iter()
                .map(|th| {
                    let mut sc = TandemScenario::new(1, c, *cross, *th).map_err(|e| e.to_string())?;
                    apply_search(cfg, &slot, &mut sc).map_err(|e| e.to_string())?;
                    e2e_delay_violation(&sc, d).map(|r| r.ln_epsilon).map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    let mut ok = 0;
    let mut first_err = None;
    for (h, row) in hs.iter().zip(cells) {
        let mut r = vec![num(*h)];
        for (i, cell) in row.into_iter().enumerate() {
            match cell {
                Ok(l) => {
                    ok += 1;
                    r.push(num(log10_prob(l)));
                }
                Err(e) => {
                    log::warn!("H_cr = {h}, {}: {e}", through_label(&cfg.through, i));
                    first_err.get_or_insert(e);
                    r.push(num(f64::NAN));
                }
            }
        }
        tab.push(r);
    }
    if ok == 0 {
        return Err(CliError::Infeasible(first_err.unwrap_or_default()));
    }
    let series = (0..throughs.len())
        .map(|i| Series::column(1, i + 2, format!("{} through", through_label(&cfg.through, i).to_uppercase())))
        .collect();
    emit(
        run.out,
        &run.stem,
        &tab,
        &Plot {
            title: run.title(&format!("violation probability of a {d_text} delay bound")),
            xlabel: "H_cr".into(),
            ylabel: "log10 P[W > d]".into(),
            points: true,
            series,
            ..Plot::default()
        },
    )
}

pub fn e2e(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.cfg;
    let slot = cfg.slot()?;
    let c = cfg.capacity()?;
    let cross_block = cfg.section(&cfg.cross, "[cross]")?;
    let through = match cfg.through.as_slice() {
        [one] => one.as_through(&slot)?,
        [] => return Err(CliError::Config("missing [[through]]".into())),
        _ => return Err(CliError::Config("e2e takes exactly one [[through]] flow".into())),
    };
    let block = cfg.section(&cfg.e2e, "[e2e]")?;
    check_probability("e2e.epsilon", block.epsilon)?;
    let families: Vec<(f64, CrossTraffic)> = match cross_block.kind {
        TrafficKind::Fbm => {
            if !block.burstiness.is_empty() {
                return Err(CliError::Config("e2e.burstiness needs ebb cross traffic".into()));
            }
            let hs = if block.hurst.is_empty() {
                vec![cross_block.hurst.ok_or_else(|| CliError::Config("fbm traffic needs `hurst`".into()))?]
            } else {
                block.hurst.clone()
            };
            hs.iter()
                .map(|&h| Ok((h, cross_block.with_hurst(h).as_cross(&slot)?)))
                .collect::<Result<_, CliError>>()?
        }
        TrafficKind::Ebb => {
            if !block.hurst.is_empty() {
                return Err(CliError::Config("e2e.hurst needs fbm cross traffic".into()));
            }
            let ts = if block.burstiness.is_empty() {
                vec![cross_block
                    .burstiness
                    .ok_or_else(|| CliError::Config("ebb traffic needs `burstiness`".into()))?]
            } else {
                block.burstiness.clone()
            };
            ts.iter()
                .map(|&t| Ok((t, cross_block.with_burstiness(t).as_cross(&slot)?)))
                .collect::<Result<_, CliError>>()?
        }
        TrafficKind::Cbr => return Err(CliError::Config("cross traffic must be fbm or ebb".into())),
    };
    expect_variable(cfg, &["n"])?;
    let ns: Vec<usize> = cfg.sweep()?.points(Dimension::Count, &slot)?.iter().map(|&n| n as usize).collect();

    let jobs: Vec<(f64, CrossTraffic, usize)> = families
        .iter()
        .flat_map(|&(v, cross)| ns.iter().map(move |&n| (v, cross, n)))
        .collect();
    let results: Vec<Result<_, String>> = jobs
        .par_iter()
        .map(|&(_, cross, n)| {
            let mut sc = TandemScenario::new(n, c, cross, through).map_err(|e| e.to_string())?;
            apply_search(cfg, &slot, &mut sc).map_err(|e| e.to_string())?;
            e2e_delay_at_epsilon(&sc, block.epsilon).map_err(|e| e.to_string())
        })
        .collect();

    let mut tab = Table::new([
        "n",
        "H_cr_or_T_cr",
        "delay_slots",
        "delay_ms",
        "delay_ms_per_hop",
        "epsilon",
        "beta_or_theta_opt",
        "Delta_opt_bits_per_slot",
        "r_cr_opt_bits_per_slot",
        "status",
    ]);
    let mut statuses = Vec::new();
    for (&(v, _, n), res) in jobs.iter().zip(results) {
        match res {
            Ok(r) => {
                let ms = slot.slots_to_ms(r.d);
                tab.push(vec![
                    n.to_string(),
                    num(v),
                    num(r.d),
                    num(ms),
                    num(ms / n as f64),
                    num(r.epsilon),
                    num(r.cross_param),
                    num(r.delta),
                    num(r.r_cr),
                    "ok".into(),
                ]);
                statuses.push("ok".into());
            }
            Err(e) => {
                let s = status(format!("n = {n}, family {v}: {e}"));
                let mut row = vec![n.to_string(), num(v)];
                row.extend(std::iter::repeat_n(num(f64::NAN), 7));
                row.push(s.clone());
                tab.push(row);
                statuses.push(s);
            }
        }
    }
    require_some(&statuses)?;

    let symbol = if cross_block.kind == TrafficKind::Fbm { "H_cr" } else { "T_cr" };
    let family_series = |col: usize| -> Vec<Series> {
        families
            .iter()
            .map(|(v, _)| Series {
                using: format!("1:(($2=={v}) ? ${col} : NaN)"),
                title: format!("{symbol} = {v}"),
            })
            .collect()
    };
    let mut files = emit(
        run.out,
        &run.stem,
        &tab,
        &Plot {
            title: run.title(&format!("end-to-end delay bound at eps = {}", block.epsilon)),
            xlabel: "n".into(),
            ylabel: "delay [ms]".into(),
            points: true,
            series: family_series(4),
            ..Plot::default()
        },
    )?;
    let per_hop = Plot {
        title: run.title(&format!("end-to-end delay bound per hop at eps = {}", block.epsilon)),
        xlabel: "n".into(),
        ylabel: "delay / n [ms]".into(),
        points: true,
        series: family_series(5),
        ..Plot::default()
    };
    let stem = format!("{}_per_hop", run.stem);
    files.push(write_atomic(
        run.out,
        &format!("{stem}.gp"),
        per_hop.script(&format!("{}.csv", run.stem), &stem).as_bytes(),
    )?);
    Ok(files)
}

pub fn simulate(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let cfg = run.cfg;
    let slot = cfg.slot()?;
    let t = cfg.traffic()?.fbm(&slot)?;
    let sim = cfg.section(&cfg.simulate, "[simulate]")?;
    check_probability("simulate.eta", sim.eta)?;
    if !(sim.beta >= 0.0 && sim.beta < 1.0 - t.hurst()) {
        return Err(CliError::Config(format!("simulate.beta = {} outside [0, 1 − H)", sim.beta)));
    }
    if sim.horizon == 0 {
        return Err(CliError::Config("simulate.horizon must be at least 1".into()));
    }
    let trials = run
        .trials
        .or(sim.trials)
        .ok_or_else(|| CliError::Config("no trial count: set simulate.trials or pass --trials".into()))?;
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let budget = trials.saturating_mul(sim.horizon as u64);
    if budget > MAX_SLOT_BUDGET {
        return Err(CliError::Resource(format!(
            "{trials} trials × {} slots = {budget} slots exceeds the limit of {MAX_SLOT_BUDGET}",
            sim.horizon
        )));
    }
    log::info!("simulating {trials} paths of {} slots, seed {}", sim.horizon, run.seed);
    let curve = envelope_violation_mc(&t, sim.beta, sim.eta, sim.horizon, trials, run.seed)
        .map_err(|e| CliError::Infeasible(e.to_string()))?;
    let partial = pointwise_partial_sums(sim.beta, sim.eta, sim.horizon).map_err(|e| config_err("simulate", e))?;
    let eps_s = if sim.beta > 0.0 {
        sample_path_epsilon(sim.beta, sim.eta).map_err(|e| config_err("simulate", e))?
    } else {
        f64::NAN
    };

    let mut pw = Table::new([
        "t_slots",
        "empirical_freq",
        "ci_low",
        "ci_high",
        "analytic_bound",
        "gaussian_exact",
    ]);
    let mut sp = Table::new([
        "t_slots",
        "empirical_freq",
        "ci_low",
        "ci_high",
        "analytic_bound",
        "sample_path_bound",
    ]);
    let mut above = (0, 0);
    for k in 1..=sim.horizon {
        let tau = k as f64;
        let p = curve.pointwise_at(k);
        let bound = pointwise_bound(sim.beta, sim.eta, tau).map_err(|e| config_err("simulate", e))?;
        let exact = pointwise_exact(sim.beta, sim.eta, tau).map_err(|e| config_err("simulate", e))?;
        let (lo, hi) = p.clopper_pearson(BAND_ALPHA);
        pw.push(vec![num(tau), num(p.frequency()), num(lo), num(hi), num(bound), num(exact)]);
        above.0 += usize::from(!p.below(bound, 3.0));

        let s = curve.cumulative_at(k);
        let sum = partial[k - 1].min(1.0);
        let (lo, hi) = s.clopper_pearson(BAND_ALPHA);
        sp.push(vec![num(tau), num(s.frequency()), num(lo), num(hi), num(sum), num(eps_s)]);
        above.1 += usize::from(!s.below(sum, 3.0));
    }
    if above != (0, 0) {
        log::warn!(
            "empirical frequency above bound + 3σ at {} (point-wise) and {} (sample-path) of {} slots",
            above.0,
            above.1,
            sim.horizon
        );
    }
    let mut files = emit(
        run.out,
        &format!("{}_pointwise", run.stem),
        &pw,
        &Plot {
            title: run.title(&format!("point-wise overflow, beta = {}, {trials} paths", sim.beta)),
            xlabel: "t [slots]".into(),
            ylabel: "P[A(t) > E(t)]".into(),
            logy: true,
            series: vec![
                Series::column(1, 2, "simulation"),
                Series::column(1, 5, "eta^(t^(2 beta))"),
                Series::column(1, 6, "Gaussian exact"),
            ],
            ..Plot::default()
        },
    )?;
    files.extend(emit(
        run.out,
        &format!("{}_samplepath", run.stem),
        &sp,
        &Plot {
            title: run.title(&format!("sample-path overflow, beta = {}, {trials} paths", sim.beta)),
            xlabel: "t [slots]".into(),
            ylabel: "P[sup A - E > 0 on [0, t]]".into(),
            logy: true,
            series: vec![
                Series::column(1, 2, "simulation"),
                Series::column(1, 5, "sum of point-wise bounds"),
                Series::column(1, 6, "sample-path bound"),
            ],
            ..Plot::default()
        },
    )?);
    Ok(files)
}
