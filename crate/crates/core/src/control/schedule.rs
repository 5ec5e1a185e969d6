use crate::error::{Error, Result};

/// Default bound on the segment amplitudes `|Λ|`.
pub const LAMBDA_MAX: f64 = 4.0;

/// Piecewise-constant twist-and-turn drive `Ω(t) = Λ_k N χ / 2`.
///
/// Segment `k` (0-based) is active on `[kT/n, (k+1)T/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    atom_count: usize,
    total_time: f64,
    lambdas: Vec<f64>,
    chi_sign: f64,
}

impl ControlSchedule {
    pub fn new(atom_count: usize, total_time: f64, lambdas: Vec<f64>) -> Result<Self> {
        let schedule = Self {
            atom_count,
            total_time,
            lambdas,
            chi_sign: 1.0,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn constant(atom_count: usize, total_time: f64, segments: usize, lambda: f64) -> Result<Self> {
        Self::new(atom_count, total_time, vec![lambda; segments])
    }

    pub fn validate(&self) -> Result<()> {
        if self.atom_count < 1 {
            return Err(Error::AtomCount { got: 0, min: 1 });
        }
        if self.lambdas.is_empty() {
            return Err(Error::InvalidSchedule("no segments".into()));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "total time must be positive and finite, got {}",
                self.total_time
            )));
        }
        if let Some(k) = self.lambdas.iter().position(|l| !l.is_finite()) {
            return Err(Error::InvalidSchedule(format!("segment {} amplitude is not finite", k + 1)));
        }
        Ok(())
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn segments(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn chi_sign(&self) -> f64 {
        self.chi_sign
    }

    pub fn segment_duration(&self) -> f64 {
        self.total_time / self.segments() as f64
    }

    pub fn segment_start(&self, k: usize) -> f64 {
        self.total_time * k as f64 / self.segments() as f64
    }

    /// Index of the segment active at time `t`; `t = T` belongs to the last.
    pub fn segment_index(&self, t: f64) -> Option<usize> {
        if !(0.0..=self.total_time).contains(&t) {
            return None;
        }
        let k = (t / self.segment_duration()).floor() as usize;
        Some(k.min(self.segments() - 1))
    }

    /// Rabi frequency on segment `k`.
    pub fn omega(&self, k: usize, chi: f64) -> f64 {
        self.lambdas[k] * self.atom_count as f64 * chi / 2.0
    }

    pub fn with_lambdas(&self, lambdas: Vec<f64>) -> Result<Self> {
        Self::new(self.atom_count, self.total_time, lambdas)
    }

    /// Largest `|Λ|` over all segments.
    pub fn max_amplitude(&self) -> f64 {
        self.lambdas.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_boundaries_are_half_open() {
        let s = ControlSchedule::new(10, 1.0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.segment_index(0.0), Some(0));
        assert_eq!(s.segment_index(0.25), Some(1));
        assert_eq!(s.segment_index(0.74), Some(2));
        assert_eq!(s.segment_index(1.0), Some(3));
        assert_eq!(s.segment_index(1.1), None);
        assert_eq!(s.omega(1, 1.0), 10.0);
    }

    #[test]
    fn invalid_schedules() {
        assert!(ControlSchedule::new(10, 1.0, vec![]).is_err());
        assert!(ControlSchedule::new(10, 0.0, vec![1.0]).is_err());
        assert!(ControlSchedule::new(10, 1.0, vec![f64::NAN]).is_err());
    }
}
