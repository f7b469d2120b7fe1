use alloc::vec::Vec;

use crate::error::Result;
use crate::profiler::CalibrationProfile;
use crate::sched::TaskRef;

/// A task occupying an LLM batch slot.
#[derive(Clone, Debug, PartialEq)]
pub struct LlmSlot {
    pub task: TaskRef,
    pub started: f64,
    /// True duration at batch size 1.
    pub work: f64,
    /// Projected completion at the current batch size.
    pub finish: f64,
    pub version: u64,
}

/// An LLM serving instance with continuous batching.
#[derive(Clone, Debug, Default)]
pub struct LlmExecutor {
    pub running: Vec<LlmSlot>,
    pub busy_since: Option<f64>,
}

impl LlmExecutor {
    pub fn batch(&self) -> usize {
        self.running.len()
    }

    /// Batch-1 work already done by `slot` at `now`.
    pub fn progress(&self, slot: &LlmSlot, cal: &CalibrationProfile, now: f64) -> Result<f64> {
        let left = cal.calibrate((slot.finish - now).max(0.0), self.batch(), 1)?;
        Ok((slot.work - left).max(0.0))
    }

    /// Rescales every running task's remaining time for a batch change from
    /// `b_old` to `b_new` at `now`. Returns the re-keyed tasks with their new
    /// completion times; the caller assigns versions.
    pub fn rescale(
        &mut self,
        cal: &CalibrationProfile,
        b_old: usize,
        b_new: usize,
        now: f64,
    ) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(self.running.len());
        for (i, slot) in self.running.iter_mut().enumerate() {
            let left = rescale_remaining(cal, (slot.finish - now).max(0.0), b_old, b_new)?;
            slot.finish = now + left;
            out.push((i, slot.finish));
        }
        Ok(out)
    }
}

/// Remaining time of an in-flight LLM task after its batch changes size.
pub fn rescale_remaining(cal: &CalibrationProfile, remaining: f64, b_old: usize, b_new: usize) -> Result<f64> {
    cal.calibrate(remaining, b_old, b_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rescale_examples() {
        let cal = CalibrationProfile::new(vec![20.0, 30.0]).unwrap();
        assert!((rescale_remaining(&cal, 10.0, 1, 2).unwrap() - 15.0).abs() < 1e-12);
        assert!((rescale_remaining(&cal, 15.0, 2, 1).unwrap() - 10.0).abs() < 1e-12);
        let flat = CalibrationProfile::constant(20.0, 4).unwrap();
        assert_eq!(rescale_remaining(&flat, 7.0, 1, 4).unwrap(), 7.0);
    }

    #[test]
    fn executor_rescale_rekeys() {
        let cal = CalibrationProfile::new(vec![20.0, 30.0]).unwrap();
        let mut ex = LlmExecutor::default();
        let task = TaskRef { job: 0, stage: 0, task: 0 };
        ex.running.push(LlmSlot { task, started: 0.0, work: 12.0, finish: 12.0, version: 0 });
        let out = ex.rescale(&cal, 1, 2, 2.0).unwrap();
        assert_eq!(out, vec![(0, 17.0)]);
        ex.running.push(LlmSlot { task, started: 2.0, work: 1.0, finish: 3.5, version: 1 });
        assert!((ex.progress(&ex.running[0].clone(), &cal, 5.0).unwrap() - 4.0).abs() < 1e-12);
    }
}
