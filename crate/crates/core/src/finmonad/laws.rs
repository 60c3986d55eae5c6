//! Exhaustive monad-law and monad-map checking.

use crate::error::{Error, Result};
use crate::finset::{function_count, functions, FinSet};
use crate::report::LawReport;

use super::{FinMonad, MonadMap};

#[derive(Debug, Clone, Copy)]
pub struct LawCheckConfig {
    pub max_a: usize,
    pub max_b: usize,
    pub max_c: usize,
    /// Cap on evaluated instances per law; beyond it the enumeration is
    /// strided deterministically and the report is flagged partial.
    pub cap: u64,
}

impl LawCheckConfig {
    pub fn sizes(max_a: usize, max_b: usize, max_c: usize) -> Self {
        LawCheckConfig {
            max_a,
            max_b,
            max_c,
            cap: 4_000_000,
        }
    }
}

impl Default for LawCheckConfig {
    fn default() -> Self {
        LawCheckConfig::sizes(2, 2, 2)
    }
}

fn stride_for(total: u128, cap: u64) -> (usize, bool) {
    if total <= cap as u128 {
        (1, false)
    } else {
        ((total / cap as u128) as usize + 1, true)
    }
}

/// Evaluate both sides of an equation; a `DepthExceeded` on either side
/// skips the instance, any other error is reported as a violation.
macro_rules! compare {
    ($report:expr, $law:expr, $witness:expr, $lhs:expr, $rhs:expr) => {
        match ($lhs, $rhs) {
            (Ok(l), Ok(r)) => {
                $report.checked += 1;
                if l != r {
                    $report.violate($law, $witness);
                }
            }
            (Err(Error::DepthExceeded { .. }), _)
            | (_, Err(Error::DepthExceeded { .. }))
            | (Err(Error::Truncated(_)), _)
            | (_, Err(Error::Truncated(_))) => {
                $report.skipped += 1;
            }
            (Err(e), _) | (_, Err(e)) => {
                $report.violate($law, format!("{}: {e}", $witness));
            }
        }
    };
}

/// Exhaustively verify left unit, right unit and associativity over all
/// computations and continuations at sizes up to the configured bounds.
pub fn check_monad_laws(m: &dyn FinMonad, cfg: &LawCheckConfig) -> LawReport {
    let mut report = LawReport::new(format!("monad laws for {}", m.name()));

    for a in 0..=cfg.max_a {
        let a = FinSet(a);
        let ta = match m.carrier_len(a) {
            Ok(n) => n,
            Err(e) => {
                report.violate("carrier", format!("{a}: {e}"));
                continue;
            }
        };

        // Right unit: t >>= return = t.
        if let Ok(rets) = super::ret_family(m, a) {
            for t in 0..ta {
                compare!(
                    report,
                    "right unit",
                    format!("t={} at {a}", m.describe(a, t)),
                    m.bind(a, a, t, &rets),
                    Ok::<usize, Error>(t)
                );
            }
        }

        for b in 0..=cfg.max_b {
            let b = FinSet(b);
            let tb = match m.carrier_len(b) {
                Ok(n) => n,
                Err(_) => continue,
            };

            // Left unit: return v >>= u = u(v).
            let total = a.size() as u128 * function_count(a.size(), tb);
            let (step, partial) = stride_for(total, cfg.cap);
            report.partial |= partial;
            for (i, u) in functions(a.size(), tb).enumerate() {
                if i % step != 0 {
                    continue;
                }
                for v in a.elements() {
                    let witness = || format!("v={v}, u={:?} at {a}->{b}", u);
                    compare!(
                        report,
                        "left unit",
                        witness(),
                        m.ret(a, v).and_then(|r| m.bind(a, b, r, &u)),
                        Ok::<usize, Error>(u[v])
                    );
                }
            }

            // Associativity: (t >>= u) >>= v = t >>= (λx. u(x) >>= v).
            for c in 0..=cfg.max_c {
                let c = FinSet(c);
                let tc = match m.carrier_len(c) {
                    Ok(n) => n,
                    Err(_) => continue,
                };
                let total =
                    ta as u128 * function_count(a.size(), tb) * function_count(b.size(), tc);
                let (step, partial) = stride_for(total, cfg.cap);
                report.partial |= partial;
                let mut instance = 0u128;
                for u in functions(a.size(), tb) {
                    for v in functions(b.size(), tc) {
                        // Precompose u(x) >>= v once per (u, v).
                        let fused: Result<Vec<usize>> =
                            u.iter().map(|&ux| m.bind(b, c, ux, &v)).collect();
                        for t in 0..ta {
                            instance += 1;
                            if !instance.is_multiple_of(step as u128) {
                                continue;
                            }
                            let lhs = m.bind(a, b, t, &u).and_then(|tu| m.bind(b, c, tu, &v));
                            let rhs = match &fused {
                                Ok(f) => m.bind(a, c, t, f),
                                Err(e) => Err(e.clone()),
                            };
                            compare!(
                                report,
                                "associativity",
                                format!("t={}, u={u:?}, v={v:?} at {a},{b},{c}", m.describe(a, t)),
                                lhs,
                                rhs
                            );
                        }
                    }
                }
            }
        }
    }
    report
}

/// Verify `γ(return v) = return v` and `γ(t >>= u) = γ(t) >>= γ∘u`.
pub fn check_monad_map(map: &MonadMap<'_>, cfg: &LawCheckConfig) -> LawReport {
    let mut report = LawReport::new(format!(
        "monad map {}: {} -> {}",
        map.label,
        map.source.name(),
        map.target.name()
    ));
    for a in 0..=cfg.max_a {
        let a = FinSet(a);
        for v in a.elements() {
            compare!(
                report,
                "preserves return",
                format!("v={v} at {a}"),
                map.source.ret(a, v).and_then(|r| map.apply(a, r)),
                map.target.ret(a, v)
            );
        }
        let ta = match map.source.carrier_len(a) {
            Ok(n) => n,
            Err(e) => {
                report.violate("carrier", format!("{a}: {e}"));
                continue;
            }
        };
        for b in 0..=cfg.max_b {
            let b = FinSet(b);
            let tb = match map.source.carrier_len(b) {
                Ok(n) => n,
                Err(_) => continue,
            };
            let total = ta as u128 * function_count(a.size(), tb);
            let (step, partial) = stride_for(total, cfg.cap);
            report.partial |= partial;
            let mut instance = 0u128;
            for u in functions(a.size(), tb) {
                let mapped: Result<Vec<usize>> = u.iter().map(|&ux| map.apply(b, ux)).collect();
                for t in 0..ta {
                    instance += 1;
                    if !instance.is_multiple_of(step as u128) {
                        continue;
                    }
                    let lhs = map.source.bind(a, b, t, &u).and_then(|tu| map.apply(b, tu));
                    let rhs = match (&mapped, map.apply(a, t)) {
                        (Ok(mu), Ok(mt)) => map.target.bind(a, b, mt, mu),
                        (Err(e), _) => Err(e.clone()),
                        (_, Err(e)) => Err(e),
                    };
                    compare!(
                        report,
                        "preserves bind",
                        format!("t={}, u={u:?} at {a}->{b}", map.source.describe(a, t)),
                        lhs,
                        rhs
                    );
                }
            }
        }
    }
    report
}
