//! OpenQASM 2.0 export and a small reader for the subset it emits.

use std::fmt::Write as _;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transform::{dense_model_matrix, TransformModel};

/// Renders the model as OpenQASM 2.0, one commented section per block.
///
/// `u3` follows the `qelib1.inc` definition, which is the same matrix as
/// [`crate::transform::u3_matrix`]; controlled phases use `cu1`.
pub fn to_qasm<T: Scalar>(model: &TransformModel<T>) -> String {
    let n = model.n();
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "// q[i] addresses bit n-1-i of the amplitude index, q[0] is the most significant");
    let _ = writeln!(out, "// n={n} depth={}", model.depth());
    let _ = writeln!(out, "qreg q[{n}];");
    for (d, block) in model.blocks().iter().enumerate() {
        let _ = writeln!(out, "// block {d}");
        for g in Circuit::from_params(block).gates() {
            match *g {
                Gate::U3 { qubit, alpha, beta, gamma } => {
                    let _ = writeln!(
                        out,
                        "u3({:?},{:?},{:?}) q[{qubit}];",
                        alpha.as_f64(),
                        beta.as_f64(),
                        gamma.as_f64()
                    );
                }
                Gate::CPhase { control, target, theta } => {
                    let _ = writeln!(out, "cu1({:?}) q[{control}],q[{target}];", theta.as_f64());
                }
                Gate::Swap { a, b } => {
                    let _ = writeln!(out, "swap q[{a}],q[{b}];");
                }
            }
        }
    }
    out
}

/// Parses the subset written by [`to_qasm`]: one `qreg`, and the gates
/// `u3`/`U`, `u1`/`p`, `cu1`/`cp`, `swap` and `barrier`, with arithmetic
/// angle expressions over `pi`.
pub fn parse_qasm(text: &str) -> Result<Circuit<f64>> {
    let mut circuit: Option<Circuit<f64>> = None;
    let mut reg = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| Error::Qasm { line, msg };
        let code = raw.split("//").next().unwrap_or("").trim();
        for stmt in code.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            if stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("barrier") {
                continue;
            }
            if let Some(rest) = stmt.strip_prefix("qreg") {
                if circuit.is_some() {
                    return Err(err("only one qreg is supported".into()));
                }
                let (name, size) = parse_operand(rest.trim()).map_err(err)?;
                reg = name;
                circuit = Some(Circuit::new(size));
                continue;
            }
            let c = circuit.as_mut().ok_or_else(|| err("gate before qreg".into()))?;
            let (head, operands) = split_gate(stmt).map_err(err)?;
            let (name, args) = match head.find('(') {
                Some(open) => {
                    let close = head.rfind(')').ok_or_else(|| err("unclosed parameter list".into()))?;
                    let args = split_args(&head[open + 1..close])
                        .iter()
                        .map(|a| eval_expr(a))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(err)?;
                    (head[..open].trim(), args)
                }
                None => (head.trim(), Vec::new()),
            };
            let qubits = operands
                .split(',')
                .map(|o| {
                    let (r, q) = parse_operand(o.trim())?;
                    if r != reg {
                        return Err(format!("unknown register {r}"));
                    }
                    Ok(q)
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(err)?;
            let arity = |a: usize, q: usize| {
                if args.len() == a && qubits.len() == q {
                    Ok(())
                } else {
                    Err(err(format!("{name} expects {a} parameters and {q} qubits")))
                }
            };
            let gate = match name {
                "u3" | "U" => {
                    arity(3, 1)?;
                    Gate::U3 { qubit: qubits[0], alpha: args[0], beta: args[1], gamma: args[2] }
                }
                "u1" | "p" => {
                    arity(1, 1)?;
                    Gate::U3 { qubit: qubits[0], alpha: 0.0, beta: 0.0, gamma: args[0] }
                }
                "cu1" | "cp" => {
                    arity(1, 2)?;
                    Gate::CPhase { control: qubits[0], target: qubits[1], theta: args[0] }
                }
                "swap" => {
                    arity(0, 2)?;
                    Gate::Swap { a: qubits[0], b: qubits[1] }
                }
                other => return Err(err(format!("unsupported gate {other}"))),
            };
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
    }
    circuit.ok_or(Error::Qasm { line: 0, msg: "no qreg declared".into() })
}

/// Rebuilds the unitary of `text` and compares it with the model's dense
/// matrix. Returns the largest entry difference, or a verification error
/// when it exceeds `tol`.
pub fn verify_qasm<T: Scalar>(text: &str, model: &TransformModel<T>, tol: f64) -> Result<f64> {
    let parsed = parse_qasm(text)?;
    if parsed.n() != model.n() {
        return Err(Error::Verification(format!(
            "qasm declares {} qubits, model has {}",
            parsed.n(),
            model.n()
        )));
    }
    let want = dense_model_matrix(&model.cast::<f64>())?;
    let got = parsed.unitary()?;
    let diff = got.max_abs_diff(&want);
    if diff.is_finite() && diff <= tol {
        Ok(diff)
    } else {
        Err(Error::Verification(format!("qasm unitary differs by {diff:e} (tolerance {tol:e})")))
    }
}

fn split_gate(stmt: &str) -> std::result::Result<(&str, &str), String> {
    // operands start after the parameter list, or after the first space
    let start = match stmt.find('(') {
        Some(_) => stmt.rfind(')').ok_or("unclosed parameter list")? + 1,
        None => stmt.find(char::is_whitespace).ok_or("missing operands")?,
    };
    Ok((&stmt[..start], stmt[start..].trim()))
}

fn split_args(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out
}

fn parse_operand(s: &str) -> std::result::Result<(String, usize), String> {
    let open = s.find('[').ok_or_else(|| format!("expected name[index], got {s:?}"))?;
    let close = s.rfind(']').ok_or_else(|| format!("expected name[index], got {s:?}"))?;
    let idx = s[open + 1..close].trim().parse().map_err(|_| format!("bad index in {s:?}"))?;
    Ok((s[..open].trim().to_string(), idx))
}

/// Recursive-descent evaluation of `+ - * /`, unary minus, parentheses,
/// decimal literals and `pi`.
fn eval_expr(s: &str) -> std::result::Result<f64, String> {
    let mut p = ExprParser { s: s.as_bytes(), pos: 0 };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(format!("trailing input in expression {s:?}"));
    }
    Ok(v)
}

struct ExprParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.product()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            v = if op == b'+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn product(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            v = if op == b'*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn unary(&mut self) -> std::result::Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> std::result::Result<f64, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'p') if self.s[self.pos..].starts_with(b"pi") => {
                self.pos += 2;
                Ok(std::f64::consts::PI)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    let exp_sign = (c == b'+' || c == b'-') && matches!(self.s[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let lit = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
                lit.parse().map_err(|_| format!("bad number {lit:?}"))
            }
            Some(c) => Err(format!("unexpected character {:?}", c as char)),
            None => Err("unexpected end of expression".into()),
        }
    }
}
