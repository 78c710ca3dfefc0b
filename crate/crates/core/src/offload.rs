//! Latency and energy of local execution versus offloaded execution.

use crate::scenario::Scenario;

/// A purchase of server resources: CPU frequency (Hz) and bandwidth (bit/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub f_server: f64,
    pub b: f64,
}

impl Allocation {
    pub fn new(f_server: f64, b: f64) -> Self {
        Allocation { f_server, b }
    }

    pub fn is_positive(&self) -> bool {
        self.f_server > 0.0 && self.b > 0.0
    }

    /// Whether the allocation lies inside the scenario's search box.
    pub fn within(&self, s: &Scenario) -> bool {
        (s.f_range.0..=s.f_range.1).contains(&self.f_server)
            && (s.b_range.0..=s.b_range.1).contains(&self.b)
    }

    /// The upper corner of the search box.
    pub fn box_max(s: &Scenario) -> Self {
        Allocation::new(s.f_range.1, s.b_range.1)
    }

    pub fn box_min(s: &Scenario) -> Self {
        Allocation::new(s.f_range.0, s.b_range.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBreakdown {
    pub t_local: f64,
    pub r_u: f64,
    pub r_d: f64,
    pub t_u: f64,
    pub t_p: f64,
    pub t_d: f64,
    pub t_offload: f64,
    pub t_save: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub e_local: f64,
    pub e_up: f64,
    pub e_d: f64,
    /// Signed: offloading can cost more transmit energy than it saves.
    pub e_save: f64,
}

/// Shannon rates `(r_u, r_d)` for bandwidth `b`.
pub fn link_rates(s: &Scenario, b: f64) -> (f64, f64) {
    (
        b * s.channel.uplink_efficiency(),
        b * s.channel.downlink_efficiency(),
    )
}

pub fn local_exec_time(s: &Scenario) -> f64 {
    s.q * s.cycles_per_bit / s.f_local
}

pub fn time_breakdown(s: &Scenario, a: Allocation) -> TimeBreakdown {
    let (r_u, r_d) = link_rates(s, a.b);
    let t_local = local_exec_time(s);
    let t_u = s.q / r_u;
    let t_p = s.q * s.cycles_per_bit / a.f_server;
    let t_d = s.alpha * s.q / r_d;
    let t_offload = t_u + t_p + t_d;
    TimeBreakdown {
        t_local,
        r_u,
        r_d,
        t_u,
        t_p,
        t_d,
        t_offload,
        t_save: t_local - t_offload,
    }
}

pub fn energy_breakdown(s: &Scenario, a: Allocation) -> EnergyBreakdown {
    let t = time_breakdown(s, a);
    energy_from_times(s, &t)
}

pub(crate) fn energy_from_times(s: &Scenario, t: &TimeBreakdown) -> EnergyBreakdown {
    let e_local = s.k * s.q * s.cycles_per_bit * s.f_local * s.f_local;
    let e_up = s.p_u * t.t_u;
    let e_d = s.p_d * t.t_d;
    EnergyBreakdown {
        e_local,
        e_up,
        e_d,
        e_save: e_local - e_up - e_d,
    }
}
