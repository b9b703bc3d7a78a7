//! Canonical text encoding of circuits.
//!
//! ```text
//! qcirc v1
//! arity 2
//! ancillas 1
//! outputs 0 1
//! salt 0110
//! h t=0
//! x t=1 c=0:1
//! rx t=2 a=1.5707963267948966e0
//! custom t=0 u=1.0000000000000000e0,0.0000000000000000e0,...
//! measure t=2
//! end
//! ```
//!
//! The `salt` line is optional and ignored by [`QuantumCircuit::from_text`].
//! Reals are written with 17 significant digits, which round-trips `f64`
//! exactly.

use num_complex::Complex64 as C64;

use super::bits::BitString;
use super::circuit::QuantumCircuit;
use super::gate::{Gate, NamedGate, Op, Unitary};
use crate::{Error, Result};

const HEADER: &str = "qcirc v1";

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

impl QuantumCircuit {
    /// Canonical encoding; equal circuits give identical text.
    pub fn to_text(&self) -> String {
        self.to_text_salted(None)
    }

    pub fn to_text_salted(&self, salt: Option<&BitString>) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        out.push_str(&format!(
            "arity {}\nancillas {}\n",
            self.arity(),
            self.ancillas()
        ));
        out.push_str("outputs");
        for w in self.outputs() {
            out.push_str(&format!(" {w}"));
        }
        out.push('\n');
        if let Some(s) = salt {
            out.push_str(&format!("salt {s}\n"));
        }
        for g in self.gates() {
            out.push_str(&gate_line(g));
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.to_text().into_bytes()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(Self::parse_text(text)?.0)
    }

    /// Parses a circuit and its optional salt line.
    pub fn parse_text(text: &str) -> Result<(Self, Option<BitString>)> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| parse_err(0, format!("unexpected end of input, wanted {what}")))
        };

        let (ln, header) = next("header")?;
        if header != HEADER {
            return Err(parse_err(ln, format!("bad header `{header}`")));
        }
        let arity = keyed_usize(next("arity")?, "arity")?;
        let ancillas = keyed_usize(next("ancillas")?, "ancillas")?;
        let (ln, outputs_line) = next("outputs")?;
        let outputs = outputs_line
            .strip_prefix("outputs")
            .ok_or_else(|| parse_err(ln, "expected `outputs`"))?
            .split_whitespace()
            .map(|w| w.parse::<usize>().map_err(|e| parse_err(ln, e.to_string())))
            .collect::<Result<Vec<_>>>()?;

        let mut circuit = QuantumCircuit::with_ancillas(arity, ancillas);
        circuit
            .set_outputs(outputs)
            .map_err(|e| parse_err(ln, e.to_string()))?;
        let mut salt = None;
        loop {
            let (ln, line) = next("`end`")?;
            if line == "end" {
                break;
            }
            let salt_body = if line == "salt" {
                Some("")
            } else {
                line.strip_prefix("salt ")
            };
            if let Some(s) = salt_body {
                if salt.is_some() || circuit.gate_count() > 0 {
                    return Err(parse_err(ln, "misplaced salt"));
                }
                salt = Some(BitString::parse(s.trim()).map_err(|e| parse_err(ln, e.to_string()))?);
                continue;
            }
            let gate = parse_gate(line).map_err(|e| match e {
                Error::Parse { msg, .. } => parse_err(ln, msg),
                other => parse_err(ln, other.to_string()),
            })?;
            circuit
                .push(gate)
                .map_err(|e| parse_err(ln, e.to_string()))?;
        }
        if let Some((ln, extra)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(parse_err(ln, format!("trailing content `{extra}`")));
        }
        Ok((circuit, salt))
    }
}

fn keyed_usize((ln, line): (usize, &str), key: &str) -> Result<usize> {
    line.strip_prefix(key)
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| parse_err(ln, format!("expected `{key} <count>`")))
}

fn gate_line(g: &Gate) -> String {
    let kind = match g.op() {
        Op::Named(n) => n.name(),
        Op::Custom(_) => "custom",
        Op::Measure => "measure",
        Op::Discard => "discard",
        Op::Prepare => "prepare",
    };
    let mut s = format!("{kind} t={}", join(g.targets(), ","));
    if !g.controls().is_empty() {
        s.push_str(" c=");
        s.push_str(&join(
            g.controls()
                .iter()
                .map(|&(w, v)| format!("{w}:{}", v as u8)),
            ",",
        ));
    }
    match g.op() {
        Op::Named(n) => {
            if let Some(a) = n.param() {
                s.push_str(&format!(" a={}", fmt_real(a)));
            }
        }
        Op::Custom(u) => {
            s.push_str(" u=");
            s.push_str(&join(
                u.data()
                    .iter()
                    .flat_map(|z| [fmt_real(z.re), fmt_real(z.im)]),
                ",",
            ));
        }
        _ => {}
    }
    s
}

fn parse_gate(line: &str) -> Result<Gate> {
    let mut tokens = line.split_whitespace();
    let kind = tokens
        .next()
        .ok_or_else(|| parse_err(0, "empty gate line"))?;
    let (mut targets, mut controls, mut angle, mut payload) = (None, Vec::new(), None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(0, format!("bad token `{tok}`")))?;
        let bad = |what: &str| parse_err(0, format!("bad {what} `{value}`"));
        match key {
            "t" => {
                targets = Some(
                    value
                        .split(',')
                        .map(|w| w.parse::<usize>().map_err(|_| bad("target")))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            "c" => {
                controls = value
                    .split(',')
                    .map(|c| {
                        let (w, v) = c.split_once(':').ok_or_else(|| bad("control"))?;
                        let w = w.parse::<usize>().map_err(|_| bad("control"))?;
                        let v = match v {
                            "0" => false,
                            "1" => true,
                            _ => return Err(bad("control value")),
                        };
                        Ok((w, v))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            "a" => angle = Some(value.parse::<f64>().map_err(|_| bad("angle"))?),
            "u" => {
                let reals = value
                    .split(',')
                    .map(|x| x.parse::<f64>().map_err(|_| bad("matrix entry")))
                    .collect::<Result<Vec<_>>>()?;
                if reals.len() % 2 != 0 {
                    return Err(bad("matrix"));
                }
                payload = Some(
                    reals
                        .chunks(2)
                        .map(|p| C64::new(p[0], p[1]))
                        .collect::<Vec<_>>(),
                );
            }
            other => return Err(parse_err(0, format!("unknown key `{other}`"))),
        }
    }
    let targets = targets.ok_or_else(|| parse_err(0, "missing targets"))?;
    let op = match kind {
        "measure" => Op::Measure,
        "discard" => Op::Discard,
        "prepare" => Op::Prepare,
        "custom" => {
            let data = payload.ok_or_else(|| parse_err(0, "custom gate without matrix"))?;
            Op::Custom(Unitary::new(targets.len(), data)?)
        }
        name => Op::Named(NamedGate::from_name(name, angle)?),
    };
    Gate::new(op, targets, controls)
}
