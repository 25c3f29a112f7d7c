//! Conversion between the slotted model (bits per slot, slots) and physical
//! units (b/s, seconds).
//!
//! The default slot is 10 µs, the transmission time of a 10 kb packet on a
//! 1 Gb/s link, so 1 Gb/s is 10 000 bits per slot. The slot length is kept
//! in nanoseconds, which makes Gb/s ↔ bits/slot a multiplication by an
//! integer.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDuration {
    nanos: f64,
}

impl Default for SlotDuration {
    fn default() -> Self {
        SlotDuration { nanos: 10_000.0 }
    }
}

impl SlotDuration {
    pub fn from_nanos(nanos: f64) -> Result<Self> {
        if !(nanos > 0.0 && nanos.is_finite()) {
            return Err(Error::domain("slot duration [ns]", nanos, "(0, ∞)"));
        }
        Ok(SlotDuration { nanos })
    }

    pub fn from_micros(us: f64) -> Result<Self> {
        Self::from_nanos(us * 1e3)
    }

    pub fn nanos(&self) -> f64 {
        self.nanos
    }

    pub fn secs(&self) -> f64 {
        self.nanos * 1e-9
    }

    pub fn gbps_to_bits_per_slot(&self, gbps: f64) -> f64 {
        gbps * self.nanos
    }

    pub fn bits_per_slot_to_gbps(&self, bits: f64) -> f64 {
        bits / self.nanos
    }

    pub fn slots_to_ms(&self, slots: f64) -> f64 {
        slots * self.nanos / 1e6
    }

    pub fn ms_to_slots(&self, ms: f64) -> f64 {
        ms * 1e6 / self.nanos
    }

    /// Parses `"<value> <unit>"` with unit one of `bits/slot`, `b/s`,
    /// `kb/s`, `Mb/s`, `Gb/s` and returns bits per slot.
    pub fn parse_rate(&self, text: &str) -> Result<f64> {
        let (value, unit) = split_quantity(text)?;
        let bits = match unit {
            "bits/slot" | "bit/slot" | "b/slot" => value,
            "Gb/s" | "Gbps" => self.gbps_to_bits_per_slot(value),
            "Mb/s" | "Mbps" => value * self.nanos / 1e3,
            "kb/s" | "kbps" => value * self.nanos / 1e6,
            "b/s" | "bps" => value * self.nanos / 1e9,
            _ => return Err(Error::Parse(text.into(), format!("unknown rate unit {unit:?}"))),
        };
        Ok(bits)
    }

    /// Parses a duration (`slots`, `s`, `ms`, `us`, `ns`) and returns slots.
    pub fn parse_duration(&self, text: &str) -> Result<f64> {
        let (value, unit) = split_quantity(text)?;
        let slots = match unit {
            "slot" | "slots" => value,
            "s" => value * 1e9 / self.nanos,
            "ms" => self.ms_to_slots(value),
            "us" | "µs" => value * 1e3 / self.nanos,
            "ns" => value / self.nanos,
            _ => return Err(Error::Parse(text.into(), format!("unknown time unit {unit:?}"))),
        };
        Ok(slots)
    }

    /// Parses an amount of data (`bits`, `kb`, `Mb`, `Gb`) and returns bits.
    pub fn parse_bits(text: &str) -> Result<f64> {
        let (value, unit) = split_quantity(text)?;
        let scale = match unit {
            "bit" | "bits" | "b" => 1.0,
            "kb" => 1e3,
            "Mb" => 1e6,
            "Gb" => 1e9,
            _ => return Err(Error::Parse(text.into(), format!("unknown data unit {unit:?}"))),
        };
        Ok(value * scale)
    }
}

fn split_quantity(text: &str) -> Result<(f64, &str)> {
    let t = text.trim();
    let split = t
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| Error::Parse(text.into(), "expected \"<value> <unit>\"".into()))?;
    let (num, unit) = t.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|e| Error::Parse(text.into(), format!("{e}")))?;
    if !value.is_finite() {
        return Err(Error::Parse(text.into(), "value is not finite".into()));
    }
    Ok((value, unit.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_slot_maps_gigabit_to_ten_kilobit() {
        let slot = SlotDuration::default();
        assert_eq!(slot.gbps_to_bits_per_slot(1.0), 10_000.0);
        assert_eq!(slot.parse_rate("0.5 Gb/s").unwrap(), 5_000.0);
        assert_eq!(slot.parse_rate("250 Mb/s").unwrap(), 2_500.0);
        assert_eq!(slot.parse_rate("2.5 Mb/s").unwrap(), 25.0);
        assert_eq!(slot.parse_rate("42 bits/slot").unwrap(), 42.0);
        assert_eq!(slot.parse_duration("1 ms").unwrap(), 100.0);
        assert_eq!(slot.parse_duration("10 us").unwrap(), 1.0);
        assert_eq!(slot.slots_to_ms(100.0), 1.0);
    }

    #[test]
    fn gbps_round_trip_is_exact_for_decimal_values() {
        let slot = SlotDuration::default();
        for k in 1..100_000 {
            let gbps = k as f64 / 1000.0;
            assert_eq!(slot.bits_per_slot_to_gbps(slot.gbps_to_bits_per_slot(gbps)), gbps);
        }
    }

    #[test]
    fn rejects_missing_or_unknown_units() {
        let slot = SlotDuration::default();
        assert!(slot.parse_rate("5").is_err());
        assert!(slot.parse_rate("5 furlongs").is_err());
        assert!(slot.parse_rate("abc Gb/s").is_err());
        assert!(slot.parse_duration("3 fortnights").is_err());
        assert!(SlotDuration::parse_bits("1 Mb").unwrap() == 1e6);
    }
}
