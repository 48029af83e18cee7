use crate::threshold::Threshold;

/// Unfinished work at one server, decayed lazily: the true workload at
/// time `t` is `(workload − (t − last_update))₊`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ServerState {
    pub workload: f64,
    pub last_update: f64,
}

impl ServerState {
    pub fn workload_at(&self, now: f64) -> f64 {
        (self.workload - (now - self.last_update)).max(0.0)
    }

    fn advance(&mut self, now: f64) -> f64 {
        self.workload = self.workload_at(now);
        self.last_update = now;
        self.workload
    }
}

/// Outcome of dispatching one job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JobOutcome {
    /// Response time: the earliest completion among admitted replicas.
    Served(f64),
    Lost,
}

/// The N FCFS servers of the system.
#[derive(Debug, Clone)]
pub struct ServerPool {
    servers: Vec<ServerState>,
    observed: Vec<f64>,
}

impl ServerPool {
    pub fn new(n_servers: usize) -> Self {
        ServerPool {
            servers: vec![ServerState::default(); n_servers],
            observed: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.servers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.servers.is_empty()
    }

    pub fn server(&self, j: usize) -> &ServerState {
        &self.servers[j]
    }

    pub fn workload_at(&self, j: usize, now: f64) -> f64 {
        self.servers[j].workload_at(now)
    }

    /// Dispatches the primary replica to `primary` and secondaries to
    /// `secondaries` at time `now`. All replicas observe their server's
    /// workload before any is admitted; admitted replicas then draw a
    /// service time from `service` in dispatch order (primary first).
    pub fn dispatch(
        &mut self,
        now: f64,
        primary: usize,
        secondaries: &[usize],
        t1: Threshold,
        t2: Threshold,
        mut service: impl FnMut() -> f64,
    ) -> JobOutcome {
        self.observed.clear();
        self.observed.push(self.servers[primary].advance(now));
        for &j in secondaries {
            let w = self.servers[j].advance(now);
            self.observed.push(w);
        }

        let mut best = f64::INFINITY;
        let targets = std::iter::once((primary, t1)).chain(secondaries.iter().map(|&j| (j, t2)));
        for ((j, threshold), &w) in targets.zip(self.observed.iter()) {
            if threshold.admits(w) {
                let x = service();
                self.servers[j].workload = w + x;
                best = best.min(w + x);
            }
        }
        if best.is_finite() {
            JobOutcome::Served(best)
        } else {
            JobOutcome::Lost
        }
    }
}
