//! `key=value` experiment configuration.
//!
//! One pair per line; blank lines and `#` comments are ignored. Keys:
//! `n`, `variant`, `queue`, `ordering`, `horizon`, `runs`, `seed`, `trace`,
//! `parallel_mode` (`fallback`|`dual`) and `inject_rate`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::{ParallelMode, SimConfig, DEFAULT_HORIZON};
use crate::error::{Error, Result};
use crate::gateway::Ordering;
use crate::variant::Variant;

pub const DEFAULT_RUNS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub variant: Variant,
    pub ordering: Ordering,
    pub horizon: u32,
    pub runs: usize,
    pub seed: u64,
    pub trace: bool,
    pub parallel_mode: ParallelMode,
    pub inject_rate: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 10,
            variant: Variant::basic(),
            ordering: Ordering::SWtoNEx,
            horizon: DEFAULT_HORIZON,
            runs: DEFAULT_RUNS,
            seed: 0,
            trace: false,
            parallel_mode: ParallelMode::Fallback,
            inject_rate: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn sim(&self) -> SimConfig {
        SimConfig {
            n: self.n,
            variant: self.variant,
            ordering: self.ordering,
            horizon: self.horizon,
            parallel_mode: self.parallel_mode,
            inject_per_tick: self.inject_rate,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mode = match self.parallel_mode {
            ParallelMode::Fallback => "fallback",
            ParallelMode::Dual => "dual",
        };
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "variant={}", self.variant);
        let _ = writeln!(out, "ordering={}", self.ordering);
        let _ = writeln!(out, "horizon={}", self.horizon);
        let _ = writeln!(out, "runs={}", self.runs);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "trace={}", self.trace);
        let _ = writeln!(out, "parallel_mode={mode}");
        let _ = writeln!(out, "inject_rate={}", self.inject_rate);
        out
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        msg: format!("{key}: invalid number '{value}'"),
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut queue_override = None;
    let mut n_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config { line, msg };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n" => {
                cfg.n = parse_num(line, key, value)?;
                n_line = line;
            }
            "variant" => cfg.variant = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "queue" => queue_override = Some(parse_num(line, key, value)?),
            "ordering" => cfg.ordering = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "horizon" => cfg.horizon = parse_num(line, key, value)?,
            "runs" => cfg.runs = parse_num(line, key, value)?,
            "seed" => cfg.seed = parse_num(line, key, value)?,
            "trace" => {
                cfg.trace = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(err(format!("trace: expected true/false, got '{value}'"))),
                }
            }
            "parallel_mode" => {
                cfg.parallel_mode = match value {
                    "fallback" => ParallelMode::Fallback,
                    "dual" => ParallelMode::Dual,
                    _ => {
                        return Err(err(format!(
                            "parallel_mode: expected fallback/dual, got '{value}'"
                        )))
                    }
                }
            }
            "inject_rate" => {
                cfg.inject_rate = parse_num(line, key, value)?;
                if cfg.inject_rate == 0 {
                    return Err(err("inject_rate must be positive".into()));
                }
            }
            _ => return Err(err(format!("unknown key '{key}'"))),
        }
    }
    if let Some(q) = queue_override {
        cfg.variant.queue = q;
    }
    if cfg.n < 2 || cfg.n % 2 != 0 {
        return Err(Error::Config {
            line: n_line,
            msg: "n must be even".into(),
        });
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(
            (c.variant, c.ordering, c.n, c.horizon, c.runs),
            (Variant::basic(), Ordering::SWtoNEx, 10, 300, 1000)
        );
    }

    #[test]
    fn queue_five_sw_ne_y() {
        let c = parse_config("variant=queue-5\nordering=sw-ne-y").unwrap();
        assert_eq!(c.variant, Variant::queue(5));
        assert_eq!(c.ordering, Ordering::SWtoNEy);
        assert_eq!((c.n, c.horizon, c.runs), (10, 300, 1000));
    }

    #[test]
    fn odd_n_rejected() {
        let e = parse_config("n=7").unwrap_err();
        assert_eq!(
            e,
            Error::Config {
                line: 1,
                msg: "n must be even".into()
            }
        );
        assert!(e.to_string().contains("n must be even"));
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_config("# header\nn=4\nspeed=3").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }), "{e}");
        let e = parse_config("variant=turbo").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        let e = parse_config("n=4\n\nordering=zigzag").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
        assert!(parse_config("runs=many").is_err());
        assert!(parse_config("just words").is_err());
    }

    #[test]
    fn comments_and_queue_override() {
        let c = parse_config("variant=acks-NE # second gateway\nqueue=1\n").unwrap();
        assert_eq!(c.variant, Variant::acks_ne_queue(1));
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            (1usize..8).prop_map(|h| h * 2),
            0usize..8,
            any::<bool>(),
            any::<bool>(),
            0usize..5,
            (
                1u32..2000,
                2usize..5000,
                any::<u64>(),
                any::<bool>(),
                any::<bool>(),
                1usize..4,
            ),
        )
            .prop_map(
                |(n, queue, parallel, ne, ord, (horizon, runs, seed, trace, dual, rate))| {
                    ExperimentConfig {
                        n,
                        variant: Variant {
                            queue,
                            parallel,
                            acks: if ne {
                                crate::GatewayId::NE
                            } else {
                                crate::GatewayId::SW
                            },
                        },
                        ordering: Ordering::ALL[ord],
                        horizon,
                        runs,
                        seed,
                        trace,
                        parallel_mode: if dual {
                            ParallelMode::Dual
                        } else {
                            ParallelMode::Fallback
                        },
                        inject_rate: rate,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(cfg in arb_config()) {
            prop_assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
        }
    }
}
