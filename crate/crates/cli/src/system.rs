//! Presets and explicit coefficients, expanded to the systems the commands run.

use std::collections::BTreeMap;

use liesys::ermakov::{GeneralizedErmakovSpec, PinneySpec};
use liesys::exprfn::parse;
use liesys::oscillator::{OscillatorSpec, QuarticReduction};
use liesys::sl2::Sl2Coeffs;
use liesys::Expr;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::CliError;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameter names with their defaults.
    pub params: &'static [(&'static str, &'static str)],
    pub columns: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "pinney",
        summary: "x'' = -omega2(t) x + k/x^3, with an oscillator y riding along",
        params: &[("k", "1"), ("omega2", "1")],
        columns: "t,x,v,y,vy,I1",
    },
    Preset {
        name: "ermakov",
        summary: "oscillator x and Pinney y sharing omega2(t)",
        params: &[("k", "1"), ("omega2", "1")],
        columns: "t,x,vx,y,vy,psi",
    },
    Preset {
        name: "ermakov-generalized",
        summary: "x'' = -omega2 x + f(y/x)/x^3, y'' = -omega2 y + g(y/x)/y^3",
        params: &[("f", "1"), ("g", "1"), ("omega2", "1"), ("base", "1")],
        columns: "t,x,vx,y,vy,invariant",
    },
    Preset {
        name: "pinney-triple",
        summary: "Pinney x driven together with two oscillators y and z",
        params: &[("k", "1"), ("omega2", "1")],
        columns: "t,x,vx,y,vy,z,vz,I1,I2,W",
    },
    Preset {
        name: "caldirola-kanai",
        summary: "damped oscillator with mass m0 exp(mu t)",
        params: &[("m0", "1"), ("mu", "0.2"), ("omega0", "1")],
        columns: "t,x,p,wronskian",
    },
    Preset {
        name: "td-frequency",
        summary: "x'' = -f(t) omega0^2 x",
        params: &[("f", "1"), ("omega0", "1")],
        columns: "t,x,p,wronskian",
    },
    Preset {
        name: "quartic-family",
        summary: "x'' = -omega0^2 (u1 t + u0)^-4 x",
        params: &[("u0", "1"), ("u1", "1"), ("omega0", "1")],
        columns: "t,x,p,wronskian",
    },
];

#[derive(Debug, Clone, PartialEq)]
pub enum OscKind {
    Explicit,
    CaldirolaKanai { m0: f64, mu: f64, omega0: f64 },
    TdFrequency,
    Quartic { u0: f64, u1: f64, omega0: f64 },
}

/// What a command runs on.
#[derive(Debug, Clone)]
pub enum System {
    Riccati(Sl2Coeffs),
    /// The linear action of the coefficients on `(x, p)`.
    Oscillator(Sl2Coeffs, OscKind),
    Pinney(PinneySpec),
    Ermakov(PinneySpec),
    Generalized(GeneralizedErmakovSpec),
    Triple(PinneySpec),
}

/// Initial data, any of which may be left to defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Initial {
    pub x0: Option<f64>,
    pub v0: Option<f64>,
    pub y0: Option<f64>,
    pub vy0: Option<f64>,
    pub z0: Option<f64>,
    pub vz0: Option<f64>,
}

impl Initial {
    pub const NAMES: [&'static str; 6] = ["x0", "v0", "y0", "vy0", "z0", "vz0"];

    fn slot(&mut self, name: &str) -> Option<&mut Option<f64>> {
        Some(match name {
            "x0" => &mut self.x0,
            "v0" => &mut self.v0,
            "y0" => &mut self.y0,
            "vy0" => &mut self.vy0,
            "z0" => &mut self.z0,
            "vz0" => &mut self.vz0,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match self.slot(name) {
            Some(s) => {
                *s = Some(value);
                true
            }
            None => false,
        }
    }

    /// Fills unset values: from `defaults`, or at random when a seed is
    /// given. Entries of `nonzero` are drawn away from zero.
    fn resolve(&self, defaults: [f64; 6], nonzero: [bool; 6], seed: Option<u64>) -> [f64; 6] {
        let given = [self.x0, self.v0, self.y0, self.vy0, self.z0, self.vz0];
        let mut rng: Option<ChaCha8Rng> = seed.map(rand::SeedableRng::seed_from_u64);
        let mut out = defaults;
        for i in 0..6 {
            // draw for every slot so a value does not depend on which others were given
            let drawn = rng.as_mut().map(|r| {
                if nonzero[i] {
                    r.gen_range(0.5..1.5)
                } else {
                    r.gen_range(-1.0..1.0)
                }
            });
            out[i] = given[i].or(drawn).unwrap_or(defaults[i]);
        }
        out
    }
}

/// Everything a run needs besides the command itself.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: System,
    /// `(x0, v0, y0, vy0, z0, vz0)` after defaults.
    pub init: [f64; 6],
    pub t_span: (f64, f64),
    pub samples: usize,
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SystemInput {
    pub preset: Option<String>,
    pub riccati: bool,
    pub b: [Option<String>; 3],
    pub params: BTreeMap<String, String>,
    pub initial: Initial,
}

impl SystemInput {
    /// Applies one sweep value to a parameter or an initial value.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        if self.initial.set(name, value) {
            return Ok(());
        }
        let preset = self.preset.as_deref().and_then(find_preset);
        match preset {
            Some(p) if p.params.iter().any(|(n, _)| *n == name) => {
                self.params.insert(name.to_string(), format!("{value:?}"));
                Ok(())
            }
            _ => Err(CliError::Usage(format!(
                "cannot sweep `{name}`: not a parameter of this run or one of {}",
                Initial::NAMES.join(", ")
            ))),
        }
    }

    pub fn resolve(&self, seed: Option<u64>) -> Result<(System, [f64; 6]), CliError> {
        let explicit = self.b.iter().any(Option::is_some);
        let system = match (&self.preset, explicit) {
            (Some(_), true) => {
                return Err(CliError::Usage(
                    "give either --preset or --b0/--b1/--b2, not both".into(),
                ))
            }
            (None, false) => return Err(CliError::Usage("give --preset or coefficients --b0/--b1/--b2".into())),
            (None, true) => {
                if !self.params.is_empty() {
                    return Err(CliError::Usage("--param applies to presets only".into()));
                }
                let text = |i: usize| self.b[i].as_deref().unwrap_or("0");
                let c = Sl2Coeffs::parse(text(0), text(1), text(2)).map_err(usage)?;
                if self.riccati {
                    System::Riccati(c)
                } else {
                    System::Oscillator(c, OscKind::Explicit)
                }
            }
            (Some(name), false) => {
                if self.riccati {
                    return Err(CliError::Usage(
                        "--riccati takes explicit coefficients, not a preset".into(),
                    ));
                }
                let preset = find_preset(name).ok_or_else(|| {
                    let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
                    CliError::Usage(format!("unknown preset `{name}`; known: {}", names.join(", ")))
                })?;
                expand(preset, &Params::new(preset, &self.params)?)?
            }
        };
        let (defaults, nonzero) = match &system {
            System::Riccati(_) => ([0.0; 6], [false; 6]),
            System::Oscillator(..) => ([1.0, 0.0, 1.0, 0.0, 0.0, 1.0], [false; 6]),
            System::Pinney(_) => (
                [1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
                [true, false, false, false, false, false],
            ),
            System::Ermakov(_) => (
                [0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
                [false, false, true, false, false, false],
            ),
            System::Generalized(_) => ([1.0, 0.0, 1.0, 0.0, 0.0, 0.0], [true, false, true, false, false, false]),
            System::Triple(_) => (
                [1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
                [true, false, false, false, false, false],
            ),
        };
        Ok((system, self.initial.resolve(defaults, nonzero, seed)))
    }
}

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

struct Params<'a> {
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn new(preset: &'a Preset, given: &'a BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut values: BTreeMap<&str, &str> = preset.params.iter().copied().collect();
        for (k, v) in given {
            match values.get_mut(k.as_str()) {
                Some(slot) => *slot = v,
                None => {
                    let known: Vec<_> = preset.params.iter().map(|(n, _)| *n).collect();
                    return Err(CliError::Usage(format!(
                        "preset `{}` has no parameter `{k}`; known: {}",
                        preset.name,
                        known.join(", ")
                    )));
                }
            }
        }
        Ok(Params { values })
    }

    fn expr(&self, name: &str) -> Result<Expr, CliError> {
        let text = self.values[name];
        parse(text).map_err(|e| CliError::Usage(format!("parameter {name}: {e}")))
    }

    /// A number, or an expression without variables.
    fn num(&self, name: &str) -> Result<f64, CliError> {
        let text = self.values[name];
        if let Ok(v) = text.trim().parse::<f64>() {
            return Ok(v);
        }
        let e = self.expr(name)?;
        if !e.free_vars().is_empty() {
            return Err(CliError::Usage(format!(
                "parameter {name} must be a number, got `{text}`"
            )));
        }
        e.eval_t(0.0)
            .map_err(|e| CliError::Usage(format!("parameter {name}: {e}")))
    }
}

fn expand(preset: &Preset, p: &Params) -> Result<System, CliError> {
    Ok(match preset.name {
        "pinney" => System::Pinney(PinneySpec::new(p.num("k")?, p.expr("omega2")?).map_err(usage)?),
        "ermakov" => System::Ermakov(PinneySpec::new(p.num("k")?, p.expr("omega2")?).map_err(usage)?),
        "pinney-triple" => System::Triple(PinneySpec::new(p.num("k")?, p.expr("omega2")?).map_err(usage)?),
        "ermakov-generalized" => System::Generalized(
            GeneralizedErmakovSpec::new(p.expr("f")?, p.expr("g")?, p.expr("omega2")?)
                .map_err(usage)?
                .with_base(p.num("base")?),
        ),
        "caldirola-kanai" => {
            let (m0, mu, omega0) = (p.num("m0")?, p.num("mu")?, p.num("omega0")?);
            let spec = OscillatorSpec::caldirola_kanai(m0, mu, omega0).map_err(usage)?;
            System::Oscillator(spec.to_sl2_coeffs(), OscKind::CaldirolaKanai { m0, mu, omega0 })
        }
        "td-frequency" => {
            let spec = OscillatorSpec::td_frequency(p.expr("f")?, p.num("omega0")?).map_err(usage)?;
            System::Oscillator(spec.to_sl2_coeffs(), OscKind::TdFrequency)
        }
        "quartic-family" => {
            let (u0, u1, omega0) = (p.num("u0")?, p.num("u1")?, p.num("omega0")?);
            let q = QuarticReduction::new(u0, u1, omega0).map_err(usage)?;
            System::Oscillator(q.spec().to_sl2_coeffs(), OscKind::Quartic { u0, u1, omega0 })
        }
        other => unreachable!("preset table and expansion disagree on `{other}`"),
    })
}
