//! Depth-first branch-and-bound over serial action sequences at a fixed
//! horizon. Each sequence is scheduled earliest-start, so a sequence is
//! kept only if its schedule fits the horizon; this makes the search exact
//! for the time-expanded flow model.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{apply, is_goal, legal_actions, Action, ActionKind, Arrangement, Instance, Location};

use super::bound::{demand, makespan_bound, GoalIndex};
use super::schedule::Clock;

/// Labels kept per symbolic state; extra labels are simply not stored.
const MAX_LABELS: usize = 6;

pub(crate) fn kind_rank(kind: ActionKind) -> u8 {
    match kind {
        ActionKind::Topple => 0,
        ActionKind::ScoopCarry => 1,
        ActionKind::PickPlace => 2,
        ActionKind::TablePick => 3,
        ActionKind::ScoopLoad => 4,
        ActionKind::ScoopUnload => 5,
    }
}

pub(crate) enum Outcome {
    Continue,
    Stop,
}

pub(crate) struct Search<'a, F: FnMut(&[Action], u32, u64) -> Outcome> {
    pub inst: &'a Instance,
    pub idx: &'a GoalIndex,
    pub horizon: u32,
    pub best: Option<u32>,
    pub deadline: Instant,
    pub node_limit: Option<u64>,
    pub nodes: u64,
    pub aborted: bool,
    pub stopped: bool,
    pub time_pruned: bool,
    pub on_incumbent: F,
    memo: HashMap<Vec<u16>, Vec<(u32, Vec<u16>)>>,
    path: Vec<Action>,
    rng: ChaCha8Rng,
}

struct Child {
    f: u32,
    rank: u8,
    action: Action,
    arr: Arrangement,
    clock: Clock,
}

impl<'a, F: FnMut(&[Action], u32, u64) -> Outcome> Search<'a, F> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        inst: &'a Instance,
        idx: &'a GoalIndex,
        horizon: u32,
        best: Option<u32>,
        deadline: Instant,
        node_limit: Option<u64>,
        nodes: u64,
        seed: u64,
        on_incumbent: F,
    ) -> Self {
        Search {
            inst,
            idx,
            horizon,
            best,
            deadline,
            node_limit,
            nodes,
            aborted: false,
            stopped: false,
            time_pruned: false,
            on_incumbent,
            memo: HashMap::new(),
            path: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed ^ u64::from(horizon).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        }
    }

    pub fn run(&mut self) {
        let arr = self.inst.start.clone();
        let clock = Clock::new(self.inst);
        self.dfs(&arr, &clock, 0);
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted || self.stopped {
            return true;
        }
        if self.node_limit.is_some_and(|n| self.nodes >= n)
            || (self.nodes.is_multiple_of(256) && Instant::now() >= self.deadline)
        {
            self.aborted = true;
        }
        self.aborted
    }

    /// False if an earlier visit dominates this one; otherwise records it.
    fn admit(&mut self, arr: &Arrangement, clock: &Clock, g: u32) -> bool {
        let key = arr.symbolic_key();
        let mut times = Vec::with_capacity(64);
        times.extend(clock.ext_free.iter().map(|&v| v as u16));
        times.extend(clock.stage_free.iter().map(|&v| v as u16));
        times.push(clock.slot_free as u16);
        for (o, loc) in arr.locations().iter().enumerate() {
            let relevant = !matches!(loc, Location::OnStack { .. });
            times.push(if relevant { clock.ready[o] as u16 } else { 0 });
        }
        times.extend(clock.load_min.iter().map(|&v| v as u16));
        times.extend(clock.carry_min.iter().map(|&v| v as u16));
        let labels = self.memo.entry(key).or_default();
        let dominated = labels.iter().any(|(g2, t2)| *g2 <= g && t2.iter().zip(&times).all(|(a, b)| a <= b));
        if dominated {
            return false;
        }
        labels.retain(|(g2, t2)| !(g <= *g2 && times.iter().zip(t2).all(|(a, b)| a <= b)));
        if labels.len() < MAX_LABELS {
            labels.push((g, times));
        }
        true
    }

    fn dfs(&mut self, arr: &Arrangement, clock: &Clock, g: u32) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        if is_goal(arr, &self.inst.goal) {
            // an incumbent found after the deadline is not reported
            if Instant::now() >= self.deadline {
                self.aborted = true;
                return;
            }
            if self.best.is_none_or(|b| g < b) {
                self.best = Some(g);
                if let Outcome::Stop = (self.on_incumbent)(&self.path, g, self.nodes) {
                    self.stopped = true;
                }
            }
            return;
        }
        if !self.admit(arr, clock, g) {
            return;
        }
        let mut children = Vec::new();
        for action in legal_actions(self.inst, arr) {
            let (next_clock, timed) = clock.schedule(arr, &action);
            if timed.end > self.horizon {
                self.time_pruned = true;
                continue;
            }
            let next = apply(self.inst, arr, &action).expect("legal action applies");
            let d = demand(self.idx, &next);
            let f = g + 1 + d.cost(self.idx) as u32;
            if self.best.is_some_and(|b| f >= b) {
                continue;
            }
            if makespan_bound(&d, &next_clock) > self.horizon {
                self.time_pruned = true;
                continue;
            }
            children.push(Child { f, rank: kind_rank(action.kind()), action, arr: next, clock: next_clock });
        }
        children.shuffle(&mut self.rng);
        children.sort_by_key(|c| (c.f, c.rank));
        for child in children {
            if self.best.is_some_and(|b| child.f >= b) {
                break;
            }
            self.path.push(child.action);
            self.dfs(&child.arr, &child.clock, g + 1);
            self.path.pop();
            if self.aborted || self.stopped {
                return;
            }
        }
    }
}
