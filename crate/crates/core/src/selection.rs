//! The elimination / terminal-threshold state machine.
//!
//! Both the discrete-time procedure and the continuous-time Brownian oracle
//! reduce to the same decision rule on a path of q-vectors: at each time
//! point, select the leader if its q reaches the running threshold `P`;
//! otherwise repeatedly eliminate the argmin alternative while its q is at
//! or below `c`, raising the threshold by `P ← P/(1−q)` per elimination and
//! recomputing q on the reduced active set. This module implements that rule
//! once; [`crate::procedure::run_biz`] and [`crate::oracle::run_continuous_biz`]
//! are thin drivers around it that differ only in how q is produced.
//!
//! Ordering contract, identical for both drivers: the terminal check happens
//! first at each time point and is not re-checked between eliminations; the
//! next terminal check happens at the next time point.

/// One elimination event: which alternative left the active set, at which
/// stage, and its q-value at removal (the threshold was divided by `1 − q`).
#[derive(Debug, Clone, PartialEq)]
pub struct Elimination {
    pub stage: u64,
    pub alternative: usize,
    pub q_value: f64,
}

/// Decision after one time point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// Keep sampling / advancing time.
    Continue,
    /// Terminated: the contained alternative is the selection.
    Select(usize),
}

/// State of the selection map: active set, running threshold, and the
/// elimination log.
#[derive(Debug, Clone)]
pub struct SelectionMachine {
    active: Vec<usize>,
    threshold: f64,
    c: f64,
    eliminations: Vec<Elimination>,
    q_scratch: Vec<f64>,
}

impl SelectionMachine {
    /// Fresh machine over alternatives `0..k` with threshold `p_star`.
    pub fn new(k: usize, p_star: f64, c: f64) -> Self {
        Self {
            active: (0..k).collect(),
            threshold: p_star,
            c,
            eliminations: Vec::new(),
            q_scratch: Vec::with_capacity(k),
        }
    }

    /// Active alternatives in ascending index order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, alternative: usize) -> bool {
        self.active.binary_search(&alternative).is_ok()
    }

    /// Current running threshold `P`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn eliminations(&self) -> &[Elimination] {
        &self.eliminations
    }

    pub fn into_eliminations(self) -> Vec<Elimination> {
        self.eliminations
    }

    /// Advance the machine by one time point.
    ///
    /// `fill_q` must write the q-values of the given active alternatives
    /// (in the given order) into the output buffer; because q is defined
    /// relative to the active set, it is re-invoked after every elimination
    /// while at least two alternatives remain. A lone surviving alternative
    /// is selected immediately (its q is identically 1, which meets any
    /// valid threshold).
    ///
    /// Ties in the argmax/argmin scans break toward the lowest index.
    pub fn step<F>(&mut self, stage: u64, mut fill_q: F) -> StepOutcome
    where
        F: FnMut(&[usize], &mut Vec<f64>),
    {
        if self.active.len() == 1 {
            return StepOutcome::Select(self.active[0]);
        }
        let mut q = std::mem::take(&mut self.q_scratch);
        fill_q(&self.active, &mut q);
        debug_assert_eq!(q.len(), self.active.len(), "fill_q wrote a short q-vector");

        // Terminal check first: selection takes precedence when both
        // thresholds are crossed at the same time point.
        let (i_max, q_max) = argmax(&q);
        if q_max >= self.threshold {
            let selected = self.active[i_max];
            self.q_scratch = q;
            return StepOutcome::Select(selected);
        }

        loop {
            let (i_min, q_min) = argmin(&q);
            if q_min > self.c {
                break;
            }
            let removed = self.active.remove(i_min);
            // q_min ≤ c < 1, so the divisor stays in (0, 1].
            self.threshold /= 1.0 - q_min;
            self.eliminations.push(Elimination {
                stage,
                alternative: removed,
                q_value: q_min,
            });
            if self.active.len() == 1 {
                // the survivor's q is identically 1; selected next step
                break;
            }
            fill_q(&self.active, &mut q);
            debug_assert_eq!(q.len(), self.active.len());
        }

        self.q_scratch = q;
        StepOutcome::Continue
    }
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    (best, values[best])
}
