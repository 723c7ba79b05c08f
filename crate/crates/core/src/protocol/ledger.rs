//! Per-role operation and traffic counters.

use core::ops::Sub;

use super::Role;

/// Counters for one party. A snapshot; [`CostLedger`] owns the live values.
///
/// `hom_exps` counts exponentiate-and-accumulate steps: one ciphertext
/// exponentiation whose result is folded into a running product. The fold
/// is part of the step and is not counted again in `hom_mults`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoleCounters {
    pub pk_encrypts: u64,
    pub pk_decrypts: u64,
    pub hom_mults: u64,
    pub hom_exps: u64,
    pub hom_inversions: u64,
    pub sym_encrypts: u64,
    pub sym_decrypts: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

impl RoleCounters {
    /// Homomorphic work in ciphertext-multiplication equivalents
    /// (`hom_exps + hom_mults`; inversions are tracked separately).
    pub fn hom_mult_equivalents(&self) -> u64 {
        self.hom_exps + self.hom_mults
    }

    pub fn hom_total(&self) -> u64 {
        self.hom_exps + self.hom_mults + self.hom_inversions
    }
}

impl Sub for RoleCounters {
    type Output = RoleCounters;

    /// Difference of two snapshots of the same monotone ledger.
    fn sub(self, earlier: RoleCounters) -> RoleCounters {
        RoleCounters {
            pk_encrypts: self.pk_encrypts - earlier.pk_encrypts,
            pk_decrypts: self.pk_decrypts - earlier.pk_decrypts,
            hom_mults: self.hom_mults - earlier.hom_mults,
            hom_exps: self.hom_exps - earlier.hom_exps,
            hom_inversions: self.hom_inversions - earlier.hom_inversions,
            sym_encrypts: self.sym_encrypts - earlier.sym_encrypts,
            sym_decrypts: self.sym_decrypts - earlier.sym_decrypts,
            bytes_sent: self.bytes_sent - earlier.bytes_sent,
            bytes_received: self.bytes_received - earlier.bytes_received,
        }
    }
}

/// Client and server counters for one session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostLedger {
    pub client: RoleCounters,
    pub server: RoleCounters,
}

impl CostLedger {
    pub fn role(&self, role: Role) -> &RoleCounters {
        match role {
            Role::Client => &self.client,
            Role::Server => &self.server,
        }
    }

    /// Counters accumulated since `earlier`.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            client: self.client - earlier.client,
            server: self.server - earlier.server,
        }
    }

    /// Every counter in `self` is at least its value in `earlier`.
    pub fn dominates(&self, earlier: &CostLedger) -> bool {
        let ge = |a: &RoleCounters, b: &RoleCounters| {
            a.pk_encrypts >= b.pk_encrypts
                && a.pk_decrypts >= b.pk_decrypts
                && a.hom_mults >= b.hom_mults
                && a.hom_exps >= b.hom_exps
                && a.hom_inversions >= b.hom_inversions
                && a.sym_encrypts >= b.sym_encrypts
                && a.sym_decrypts >= b.sym_decrypts
                && a.bytes_sent >= b.bytes_sent
                && a.bytes_received >= b.bytes_received
        };
        ge(&self.client, &earlier.client) && ge(&self.server, &earlier.server)
    }
}
