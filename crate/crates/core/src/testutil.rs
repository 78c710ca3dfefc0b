//! Shared proptest strategies for unit tests.

use proptest::prelude::*;

use crate::scenario::{kb_to_bits, Scenario, SnrMode};

pub fn arb_scenario() -> impl Strategy<Value = Scenario> {
    (
        (1.0f64..5000.0, 100.0f64..5000.0, 0.05f64..3.0, 1e-29f64..1e-26),
        (0.01f64..2.0, 0.01f64..2.0, 0.0f64..1.0),
        (0.01f64..2.0, 0.01f64..0.99, 0.01f64..0.99),
        (0.5f64..40.0, 0.5f64..40.0, any::<bool>()),
    )
        .prop_map(|((q_kb, c, fl, k), (pu, pd, alpha), (w1, w2, mu), (su, sd, db))| {
            let mut s = Scenario {
                q: kb_to_bits(q_kb),
                cycles_per_bit: c,
                f_local: fl * 1e9,
                k,
                p_u: pu,
                p_d: pd,
                alpha,
                w1,
                w2,
                mu,
                ..Scenario::default()
            };
            s.channel.snr_uplink = su;
            s.channel.snr_downlink = sd;
            if db {
                s.channel.mode = SnrMode::DbToLinear;
            }
            s
        })
}

