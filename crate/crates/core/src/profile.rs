use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slot::slots_ceil;

/// One instantiation of every processing delay, in ms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProcessingProfile {
    /// UE SR preparation.
    pub l1: f64,
    /// UE MAC+PHY preparation after a grant.
    pub l2: f64,
    /// Same, for the large grant that follows a BSR.
    pub l2_prime: f64,
    /// UE DL receive processing.
    pub l3: f64,
    /// gNB SR (and BSR) processing.
    pub p1: f64,
    /// MAC allocation.
    pub p2: f64,
    /// gNB PHY sample generation.
    pub p3: f64,
    /// gNB full-stack UL processing.
    pub p4: f64,
    /// gNB DL ingress processing.
    pub p5: f64,
    /// Radio front-end lead time.
    pub r1: f64,
}

impl ProcessingProfile {
    pub fn check(&self) -> Result<()> {
        let all = [
            ("l1", self.l1),
            ("l2", self.l2),
            ("l2'", self.l2_prime),
            ("l3", self.l3),
            ("p1", self.p1),
            ("p2", self.p2),
            ("p3", self.p3),
            ("p4", self.p4),
            ("p5", self.p5),
            ("r1", self.r1),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// The MAC must finish `p2 + p3` within the `a1 + 1` slots it schedules ahead,
    /// leaving the radio at least `r1`.
    pub fn check_radio(&self, advance_slots: u32, slot_ms: f64) -> Result<()> {
        let mac_phy = self.p2 + self.p3;
        let window = f64::from(advance_slots + 1) * slot_ms;
        let fits = slots_ceil(mac_phy, slot_ms) <= i64::from(advance_slots) + 1
            && self.r1 < window - mac_phy;
        if fits {
            Ok(())
        } else {
            Err(Error::RadioUnderflow {
                r1: self.r1,
                mac_phy,
                a1: advance_slots,
                slot: slot_ms,
            })
        }
    }
}
