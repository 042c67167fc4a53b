//! Named test functions used by the experiments.

use std::f64::consts::PI;

use crate::mellin::{ClassFlags, Kinks, LogHolder, TestFunction};

/// Half-width (log-coordinate) of the region where `log_windowed` equals `log x`.
pub const LOG_WINDOW: f64 = 3.0;

/// Registry ids in listing order.
pub const IDS: [&str; 7] = [
    "const1",
    "log_windowed",
    "sin_log",
    "holder_half",
    "abs_sin_log",
    "bump",
    "log",
];

pub fn lookup(id: &str) -> Option<TestFunction> {
    Some(match id {
        "const1" => const1(),
        "log_windowed" => log_windowed(),
        "sin_log" => sin_log(),
        "holder_half" => holder_half(),
        "abs_sin_log" => abs_sin_log(),
        "bump" => bump(),
        "log" => plain_log(),
        _ => return None,
    })
}

pub fn all() -> Vec<TestFunction> {
    IDS.iter().filter_map(|id| lookup(id)).collect()
}

fn regular(holder: Option<LogHolder>) -> ClassFlags {
    ClassFlags {
        bounded: true,
        log_uniformly_continuous: true,
        constant: false,
        log_holder: holder,
    }
}

pub fn const1() -> TestFunction {
    TestFunction::new("const1", |_| 1.0)
        .with_theta(|_| 0.0)
        .with_theta2(|_| 0.0)
        .with_flags(ClassFlags {
            constant: true,
            ..regular(Some(LogHolder {
                alpha: 1.0,
                constant: 0.0,
            }))
        })
}

/// `log x` on `[e^{-3}, e^{3}]`, continued by `±(3 + tanh(|log x| − 3))` outside.
///
/// The continuation matches value, slope and curvature at the seam, so the
/// function is C² and bounded by 4.
pub fn log_windowed() -> TestFunction {
    fn value(v: f64) -> f64 {
        let a = v.abs();
        if a <= LOG_WINDOW {
            v
        } else {
            v.signum() * (LOG_WINDOW + (a - LOG_WINDOW).tanh())
        }
    }
    fn theta(v: f64) -> f64 {
        let a = v.abs();
        if a <= LOG_WINDOW {
            1.0
        } else {
            let t = (a - LOG_WINDOW).tanh();
            1.0 - t * t
        }
    }
    fn theta2(v: f64) -> f64 {
        let a = v.abs();
        if a <= LOG_WINDOW {
            0.0
        } else {
            let t = (a - LOG_WINDOW).tanh();
            -2.0 * v.signum() * t * (1.0 - t * t)
        }
    }
    TestFunction::new("log_windowed", value)
        .with_theta(theta)
        .with_theta2(theta2)
        .with_flags(regular(Some(LogHolder {
            alpha: 1.0,
            constant: 1.0,
        })))
}

pub fn sin_log() -> TestFunction {
    TestFunction::new("sin_log", f64::sin)
        .with_theta(f64::cos)
        .with_theta2(|v| -v.sin())
        .with_flags(regular(Some(LogHolder {
            alpha: 1.0,
            constant: 1.0,
        })))
}

/// `min(|log x|^{1/2}, 1)`.
pub fn holder_half() -> TestFunction {
    TestFunction::new("holder_half", |v: f64| v.abs().sqrt().min(1.0))
        .with_kinks(Kinks::At(vec![-1.0, 0.0, 1.0]))
        .with_flags(regular(Some(LogHolder {
            alpha: 0.5,
            constant: 1.0,
        })))
}

pub fn abs_sin_log() -> TestFunction {
    TestFunction::new("abs_sin_log", |v: f64| v.sin().abs())
        .with_kinks(Kinks::Periodic {
            offset: 0.0,
            period: PI,
        })
        .with_flags(regular(Some(LogHolder {
            alpha: 1.0,
            constant: 1.0,
        })))
}

/// The C^∞ bump `exp(−1/(1 − v²))` on `|v| < 1`, i.e. supported in `[e^{-1}, e]`.
pub fn bump() -> TestFunction {
    fn value(v: f64) -> f64 {
        if v.abs() < 1.0 {
            (-1.0 / (1.0 - v * v)).exp()
        } else {
            0.0
        }
    }
    fn theta(v: f64) -> f64 {
        if v.abs() < 1.0 {
            let q = 1.0 - v * v;
            value(v) * (-2.0 * v / (q * q))
        } else {
            0.0
        }
    }
    fn theta2(v: f64) -> f64 {
        if v.abs() < 1.0 {
            let q = 1.0 - v * v;
            value(v) * (6.0 * v.powi(4) - 2.0) / q.powi(4)
        } else {
            0.0
        }
    }
    TestFunction::new("bump", value)
        .with_theta(theta)
        .with_theta2(theta2)
        .with_log_support(-1.0, 1.0)
        .with_flags(regular(None))
}

/// Unclamped `log x`; unbounded, so outside the bounded-function class.
pub fn plain_log() -> TestFunction {
    TestFunction::new("log", |v| v)
        .with_theta(|_| 1.0)
        .with_theta2(|_| 0.0)
        .with_flags(ClassFlags {
            bounded: false,
            log_uniformly_continuous: true,
            constant: false,
            log_holder: Some(LogHolder {
                alpha: 1.0,
                constant: 1.0,
            }),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_resolves() {
        for id in IDS {
            assert_eq!(lookup(id).unwrap().id(), id);
        }
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn log_windowed_is_c2_at_the_seam() {
        let f = log_windowed();
        for seam in [-LOG_WINDOW, LOG_WINDOW] {
            let h = 1e-7;
            assert!((f.eval_log(seam + h) - f.eval_log(seam - h) - 2.0 * h).abs() < 1e-12);
            assert!((f.theta_log(seam + h).unwrap() - 1.0).abs() < 1e-12);
            assert!(f.theta2_log(seam + h).unwrap().abs() < 1e-6);
        }
        assert!(f.eval_log(50.0) <= 4.0 && f.eval_log(-50.0) >= -4.0);
    }

    #[test]
    fn holder_half_flags() {
        let f = holder_half();
        assert_eq!(
            f.flags().log_holder,
            Some(LogHolder {
                alpha: 0.5,
                constant: 1.0
            })
        );
    }
}
