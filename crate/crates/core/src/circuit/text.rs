//! Line-oriented text format.
//!
//! ```text
//! qubits 3
//! cbits 1
//! # stage: permutation
//! h q0
//! ry(1.8754889808102941) q2
//! cx q0 q1
//! measure q1 -> c0
//! round
//! cond xor(c0) x q2
//! ```

use std::fmt::Write as _;

use super::{Circuit, CircuitError, Condition, FanoutMode, Gate1, Instruction, Op, Pauli, Register, Stage};

fn qlist(v: &[usize]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.iter().map(|q| format!("q{q}")).collect::<Vec<_>>().join(",")
    }
}

fn with_pool(mut s: String, pool: &[usize]) -> String {
    if !pool.is_empty() {
        s.push_str(" pool ");
        s.push_str(&qlist(pool));
    }
    s
}

fn angle_list(v: &[f64]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

fn gate1_text(g: Gate1) -> String {
    match g {
        Gate1::X => "x".into(),
        Gate1::Y => "y".into(),
        Gate1::Z => "z".into(),
        Gate1::H => "h".into(),
        Gate1::S => "s".into(),
        Gate1::Sdg => "sdg".into(),
        Gate1::T => "t".into(),
        Gate1::Tdg => "tdg".into(),
        Gate1::Ry(t) => format!("ry({t})"),
        Gate1::Rz(t) => format!("rz({t})"),
        Gate1::U(a, b, c) => format!("u({a},{b},{c})"),
    }
}

fn op_text(op: &Op) -> String {
    match op {
        Op::Gate1 { gate, q } => format!("{} q{q}", gate1_text(*gate)),
        Op::Cx { c, t } => format!("cx q{c} q{t}"),
        Op::Measure { q, c } => format!("measure q{q} -> c{c}"),
        Op::Cond { cond, pauli, q } => {
            let bits = cond.cbits.iter().map(|c| format!("c{c}")).collect::<Vec<_>>().join(",");
            let neg = if cond.negated { "!" } else { "" };
            let p = match pauli {
                Pauli::X => "x",
                Pauli::Z => "z",
            };
            format!("cond {neg}xor({bits}) {p} q{q}")
        }
        Op::Round => "round".into(),
        Op::Toffoli { c1, c2, t } => format!("ccx q{c1} q{c2} q{t}"),
        Op::Cswap { c, a, b } => format!("cswap q{c} q{a} q{b}"),
        Op::Mcx { controls, target, pool } => with_pool(format!("mcx {} -> q{target}", qlist(controls)), pool),
        Op::Mcry { controls, target, theta, pool } => {
            with_pool(format!("mcry({theta}) {} -> q{target}", qlist(controls)), pool)
        }
        Op::Mcrz { controls, target, theta, pool } => {
            with_pool(format!("mcrz({theta}) {} -> q{target}", qlist(controls)), pool)
        }
        Op::Ucry { controls, target, angles } => {
            format!("ucry({}) {} -> q{target}", angle_list(angles), qlist(controls))
        }
        Op::Ucrz { controls, target, angles } => {
            format!("ucrz({}) {} -> q{target}", angle_list(angles), qlist(controls))
        }
        Op::Fanout { control, targets, mode, pool } => {
            let m = match mode {
                FanoutMode::Sequential => "sequential",
                FanoutMode::Tree => "tree",
                FanoutMode::Maf => "maf",
            };
            with_pool(format!("fanout({m}) q{control} -> {}", qlist(targets)), pool)
        }
        Op::OrCx { controls, target, pool } => with_pool(format!("orcx {} -> q{target}", qlist(controls)), pool),
        Op::ParCx { controls, target, maf, pool } => {
            let name = if *maf { "parcx(maf)" } else { "parcx" };
            with_pool(format!("{name} {} -> q{target}", qlist(controls)), pool)
        }
    }
}

pub fn serialize(c: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "qubits {}", c.num_qubits).unwrap();
    writeln!(s, "cbits {}", c.num_cbits).unwrap();
    for r in &c.registers {
        writeln!(s, "# register {} {} {}", r.name, r.start, r.len).unwrap();
    }
    let mut stage = None;
    for ins in &c.instrs {
        if ins.stage != stage {
            let name = ins.stage.map_or("none", Stage::name);
            writeln!(s, "# stage: {name}").unwrap();
            stage = ins.stage;
        }
        s.push_str(&op_text(&ins.op));
        s.push('\n');
    }
    s
}

struct LineParser<'a> {
    line: usize,
    text: &'a str,
}

impl LineParser<'_> {
    fn err(&self, msg: impl Into<String>) -> CircuitError {
        CircuitError::Parse { line: self.line, msg: format!("{}: {:?}", msg.into(), self.text) }
    }

    fn qubit(&self, tok: &str) -> Result<usize, CircuitError> {
        tok.strip_prefix('q').and_then(|d| d.parse().ok()).ok_or_else(|| self.err(format!("bad qubit {tok:?}")))
    }

    fn cbit(&self, tok: &str) -> Result<usize, CircuitError> {
        tok.strip_prefix('c').and_then(|d| d.parse().ok()).ok_or_else(|| self.err(format!("bad cbit {tok:?}")))
    }

    fn qubits(&self, tok: &str) -> Result<Vec<usize>, CircuitError> {
        if tok == "-" {
            return Ok(vec![]);
        }
        tok.split(',').map(|t| self.qubit(t)).collect()
    }

    fn angles(&self, args: &str) -> Result<Vec<f64>, CircuitError> {
        args.split(',').map(|a| a.trim().parse::<f64>().map_err(|_| self.err("bad angle"))).collect()
    }

    /// `CONTROLS -> qT [pool P]`
    fn arrow_form(&self, toks: &[&str]) -> Result<(Vec<usize>, usize, Vec<usize>), CircuitError> {
        match toks {
            [ctl, "->", t] => Ok((self.qubits(ctl)?, self.qubit(t)?, vec![])),
            [ctl, "->", t, "pool", p] => Ok((self.qubits(ctl)?, self.qubit(t)?, self.qubits(p)?)),
            _ => Err(self.err("expected `controls -> target [pool wires]`")),
        }
    }

    fn op(&self) -> Result<Op, CircuitError> {
        let toks: Vec<&str> = self.text.split_whitespace().collect();
        let (head, rest) = toks.split_first().ok_or_else(|| self.err("empty"))?;
        let (name, args) = match head.find('(') {
            Some(k) if head.ends_with(')') => (&head[..k], Some(&head[k + 1..head.len() - 1])),
            Some(_) => return Err(self.err("unbalanced parenthesis")),
            None => (*head, None),
        };
        let one_qubit = |gate: Gate1| -> Result<Op, CircuitError> {
            match rest {
                [q] => Ok(Op::Gate1 { gate, q: self.qubit(q)? }),
                _ => Err(self.err("expected one qubit")),
            }
        };
        let angle1 = || -> Result<f64, CircuitError> {
            match self.angles(args.ok_or_else(|| self.err("missing angle"))?)?.as_slice() {
                [t] => Ok(*t),
                _ => Err(self.err("expected one angle")),
            }
        };
        match (name, args) {
            ("x", None) => one_qubit(Gate1::X),
            ("y", None) => one_qubit(Gate1::Y),
            ("z", None) => one_qubit(Gate1::Z),
            ("h", None) => one_qubit(Gate1::H),
            ("s", None) => one_qubit(Gate1::S),
            ("sdg", None) => one_qubit(Gate1::Sdg),
            ("t", None) => one_qubit(Gate1::T),
            ("tdg", None) => one_qubit(Gate1::Tdg),
            ("ry", Some(_)) => one_qubit(Gate1::Ry(angle1()?)),
            ("rz", Some(_)) => one_qubit(Gate1::Rz(angle1()?)),
            ("u", Some(a)) => match self.angles(a)?.as_slice() {
                [t, p, l] => one_qubit(Gate1::U(*t, *p, *l)),
                _ => Err(self.err("u takes three angles")),
            },
            ("cx", None) => match rest {
                [c, t] => Ok(Op::Cx { c: self.qubit(c)?, t: self.qubit(t)? }),
                _ => Err(self.err("cx takes two qubits")),
            },
            ("ccx", None) => match rest {
                [a, b, t] => Ok(Op::Toffoli { c1: self.qubit(a)?, c2: self.qubit(b)?, t: self.qubit(t)? }),
                _ => Err(self.err("ccx takes three qubits")),
            },
            ("cswap", None) => match rest {
                [c, a, b] => Ok(Op::Cswap { c: self.qubit(c)?, a: self.qubit(a)?, b: self.qubit(b)? }),
                _ => Err(self.err("cswap takes three qubits")),
            },
            ("measure", None) => match rest {
                [q, "->", c] => Ok(Op::Measure { q: self.qubit(q)?, c: self.cbit(c)? }),
                _ => Err(self.err("expected `measure qN -> cM`")),
            },
            ("round", None) if rest.is_empty() => Ok(Op::Round),
            ("cond", None) => self.cond(rest),
            ("mcx", None) => {
                let (controls, target, pool) = self.arrow_form(rest)?;
                Ok(Op::Mcx { controls, target, pool })
            }
            ("mcry", Some(_)) => {
                let (controls, target, pool) = self.arrow_form(rest)?;
                Ok(Op::Mcry { controls, target, theta: angle1()?, pool })
            }
            ("mcrz", Some(_)) => {
                let (controls, target, pool) = self.arrow_form(rest)?;
                Ok(Op::Mcrz { controls, target, theta: angle1()?, pool })
            }
            ("ucry", Some(a)) | ("ucrz", Some(a)) => {
                let (controls, target, pool) = self.arrow_form(rest)?;
                if !pool.is_empty() {
                    return Err(self.err("uniformly controlled rotations take no pool"));
                }
                let angles = self.angles(a)?;
                if angles.len() as u128 != 1u128 << controls.len().min(127) {
                    return Err(self.err("expected 2^k angles for k controls"));
                }
                Ok(if name == "ucry" {
                    Op::Ucry { controls, target, angles }
                } else {
                    Op::Ucrz { controls, target, angles }
                })
            }
            ("orcx", None) => {
                let (controls, target, pool) = self.arrow_form(rest)?;
                Ok(Op::OrCx { controls, target, pool })
            }
            ("parcx", a) => {
                let maf = match a {
                    None => false,
                    Some("maf") => true,
                    Some(_) => return Err(self.err("bad parcx mode")),
                };
                let (controls, target, pool) = self.arrow_form(rest)?;
                Ok(Op::ParCx { controls, target, maf, pool })
            }
            ("fanout", Some(m)) => {
                let mode = match m {
                    "sequential" => FanoutMode::Sequential,
                    "tree" => FanoutMode::Tree,
                    "maf" => FanoutMode::Maf,
                    _ => return Err(self.err("bad fanout mode")),
                };
                let (c, targets, pool) = match rest {
                    [c, "->", t] => (self.qubit(c)?, self.qubits(t)?, vec![]),
                    [c, "->", t, "pool", p] => (self.qubit(c)?, self.qubits(t)?, self.qubits(p)?),
                    _ => return Err(self.err("expected `fanout(mode) qC -> targets [pool wires]`")),
                };
                Ok(Op::Fanout { control: c, targets, mode, pool })
            }
            _ => Err(self.err("unknown instruction")),
        }
    }

    fn cond(&self, rest: &[&str]) -> Result<Op, CircuitError> {
        let [expr, p, q] = rest else {
            return Err(self.err("expected `cond [!]xor(c..) x|z qN`"));
        };
        let (negated, expr) = match expr.strip_prefix('!') {
            Some(e) => (true, e),
            None => (false, *expr),
        };
        let inner =
            expr.strip_prefix("xor(").and_then(|e| e.strip_suffix(')')).ok_or_else(|| self.err("expected xor(...)"))?;
        let cbits =
            if inner.is_empty() { vec![] } else { inner.split(',').map(|t| self.cbit(t)).collect::<Result<_, _>>()? };
        let pauli = match *p {
            "x" => Pauli::X,
            "z" => Pauli::Z,
            _ => return Err(self.err("conditioned gate must be x or z")),
        };
        Ok(Op::Cond { cond: Condition { cbits, negated }, pauli, q: self.qubit(q)? })
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut nq = None;
    let mut nc = None;
    let mut c = Circuit::new(0);
    let mut stage = None;
    for (k, raw) in text.lines().enumerate() {
        let p = LineParser { line: k + 1, text: raw.trim() };
        let t = p.text;
        if t.is_empty() {
            continue;
        }
        if let Some(comment) = t.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(name) = comment.strip_prefix("stage:") {
                let name = name.trim();
                stage = if name == "none" {
                    None
                } else {
                    Some(Stage::from_name(name).ok_or_else(|| p.err("unknown stage"))?)
                };
            } else if let Some(reg) = comment.strip_prefix("register ") {
                let f: Vec<&str> = reg.split_whitespace().collect();
                let [name, start, len] = f.as_slice() else {
                    return Err(p.err("expected `# register NAME START LEN`"));
                };
                let parse = |s: &str| s.parse::<usize>().map_err(|_| p.err("bad register bound"));
                c.registers.push(Register { name: name.to_string(), start: parse(start)?, len: parse(len)? });
            }
            continue;
        }
        let header = |key: &str| t.strip_prefix(key).map(|v| v.trim().parse::<usize>());
        if let Some(v) = header("qubits ") {
            nq = Some(v.map_err(|_| p.err("bad qubit count"))?);
            continue;
        }
        if let Some(v) = header("cbits ") {
            nc = Some(v.map_err(|_| p.err("bad cbit count"))?);
            continue;
        }
        if nq.is_none() || nc.is_none() {
            return Err(p.err("instruction before `qubits`/`cbits` header"));
        }
        c.instrs.push(Instruction { op: p.op()?, stage });
    }
    c.num_qubits = nq.ok_or(CircuitError::Parse { line: 0, msg: "missing `qubits` header".into() })?;
    c.num_cbits = nc.ok_or(CircuitError::Parse { line: 0, msg: "missing `cbits` header".into() })?;
    c.validate()?;
    Ok(c)
}
