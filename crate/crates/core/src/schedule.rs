use crate::error::{FjError, Result};
use crate::network::Stage;

/// Time-varying sequence of stages: a finite prefix followed by a tail that
/// repeats forever. An empty period makes the schedule finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TvSchedule {
    prefix: Vec<Stage>,
    period: Vec<Stage>,
}

impl TvSchedule {
    pub fn new(prefix: Vec<Stage>, period: Vec<Stage>) -> Result<Self> {
        let n = prefix
            .first()
            .or(period.first())
            .map(Stage::n)
            .ok_or(FjError::EmptySequence)?;
        for stage in prefix.iter().chain(&period) {
            if stage.n() != n {
                return Err(FjError::DimensionMismatch {
                    expected: n,
                    found: stage.n(),
                });
            }
        }
        Ok(Self { prefix, period })
    }

    pub fn constant(stage: Stage) -> Self {
        Self {
            prefix: Vec::new(),
            period: vec![stage],
        }
    }

    pub fn periodic(period: Vec<Stage>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    pub fn n(&self) -> usize {
        self.prefix.first().or(self.period.first()).map_or(0, Stage::n)
    }

    pub fn prefix(&self) -> &[Stage] {
        &self.prefix
    }

    pub fn period(&self) -> &[Stage] {
        &self.period
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// `(Λ(k), W(k))`, or `None` past the end of a finite schedule.
    pub fn stage(&self, k: usize) -> Option<&Stage> {
        if k < self.prefix.len() {
            Some(&self.prefix[k])
        } else if self.period.is_empty() {
            None
        } else {
            Some(&self.period[(k - self.prefix.len()) % self.period.len()])
        }
    }

    /// `len` consecutive tail stages starting at offset `start` of the
    /// period, wrapping around as many times as needed.
    pub fn tail_window(&self, start: usize, len: usize) -> Result<Vec<Stage>> {
        if self.period.is_empty() {
            return Err(FjError::NonPeriodicSchedule);
        }
        let p = self.period.len();
        Ok((0..len).map(|i| self.period[(start + i) % p].clone()).collect())
    }
}
