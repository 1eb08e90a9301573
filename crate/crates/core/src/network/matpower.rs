//! MATPOWER (version 2) case text: reader and writer.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{Branch, Bus, BusKind, CaseError, Generator, NetworkCase};
use crate::Scalar;

struct Row {
    line: usize,
    vals: Vec<f64>,
}

#[derive(Default)]
struct Sections {
    name: Option<String>,
    base_mva: Option<(usize, f64)>,
    matrices: HashMap<String, Vec<Row>>,
}

enum State {
    Top,
    Matrix(String, Vec<Row>, Vec<f64>, usize),
    Cell,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '\'' | '"' => quoted = !quoted,
            '%' | '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn number(tok: &str, line: usize) -> Result<f64, CaseError> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| CaseError::Syntax {
            line,
            msg: format!("invalid number `{tok}`"),
        }),
    }
}

fn scan(text: &str) -> Result<Sections, CaseError> {
    let mut out = Sections::default();
    let mut state = State::Top;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut rest = strip_comment(raw).trim();
        loop {
            match &mut state {
                State::Cell => {
                    if let Some(p) = rest.find('}') {
                        rest = rest[p + 1..].trim_start_matches(';').trim();
                        state = State::Top;
                        continue;
                    }
                    break;
                }
                State::Top => {
                    if rest.is_empty() {
                        break;
                    }
                    if let Some(def) = rest.strip_prefix("function") {
                        if let Some((_, name)) = def.split_once('=') {
                            out.name = Some(name.trim().to_string());
                        }
                        break;
                    }
                    let Some(assign) = rest.strip_prefix("mpc.") else {
                        return Err(CaseError::Syntax {
                            line,
                            msg: format!("unexpected text `{rest}`"),
                        });
                    };
                    let Some((key, value)) = assign.split_once('=') else {
                        return Err(CaseError::Syntax {
                            line,
                            msg: "expected `mpc.<field> = <value>`".into(),
                        });
                    };
                    let key = key.trim().to_string();
                    let value = value.trim();
                    if let Some(body) = value.strip_prefix('[') {
                        if out.matrices.contains_key(&key) {
                            return Err(CaseError::Syntax {
                                line,
                                msg: format!("`mpc.{key}` defined twice"),
                            });
                        }
                        state = State::Matrix(key, Vec::new(), Vec::new(), line);
                        rest = body;
                        continue;
                    }
                    if value.starts_with('{') {
                        state = State::Cell;
                        rest = &value[1..];
                        continue;
                    }
                    if key == "baseMVA" {
                        let v = value.trim_end_matches(';').trim();
                        out.base_mva = Some((line, number(v, line)?));
                    }
                    break;
                }
                State::Matrix(_, rows, cur, _) => {
                    let mut closed = None;
                    let mut tok_start = None;
                    let bytes = rest.as_bytes();
                    let flush = |s: Option<usize>, e: usize, cur: &mut Vec<f64>| {
                        if let Some(s) = s {
                            cur.push(number(&rest[s..e], line)?);
                        }
                        Ok::<_, CaseError>(())
                    };
                    for (p, &c) in bytes.iter().enumerate() {
                        match c {
                            b' ' | b'\t' | b',' => {
                                flush(tok_start.take(), p, cur)?;
                            }
                            b';' => {
                                flush(tok_start.take(), p, cur)?;
                                if !cur.is_empty() {
                                    rows.push(Row {
                                        line,
                                        vals: std::mem::take(cur),
                                    });
                                }
                            }
                            b']' => {
                                flush(tok_start.take(), p, cur)?;
                                closed = Some(p + 1);
                                break;
                            }
                            _ => {
                                if tok_start.is_none() {
                                    tok_start = Some(p);
                                }
                            }
                        }
                    }
                    if closed.is_none() {
                        flush(tok_start.take(), bytes.len(), cur)?;
                    }
                    if !cur.is_empty() {
                        rows.push(Row {
                            line,
                            vals: std::mem::take(cur),
                        });
                    }
                    if let Some(p) = closed {
                        let State::Matrix(key, rows, _, _) =
                            std::mem::replace(&mut state, State::Top)
                        else {
                            unreachable!()
                        };
                        out.matrices.insert(key, rows);
                        rest = rest[p..].trim_start_matches(';').trim();
                        continue;
                    }
                    break;
                }
            }
        }
    }
    if let State::Matrix(key, _, _, start) = state {
        return Err(CaseError::Syntax {
            line: start,
            msg: format!("`mpc.{key}` is not closed by `]`"),
        });
    }
    Ok(out)
}

fn need_cols(rows: &[Row], n: usize, what: &str) -> Result<(), CaseError> {
    for r in rows {
        if r.vals.len() < n {
            return Err(CaseError::Syntax {
                line: r.line,
                msg: format!("{what} row has {} columns, expected at least {n}", r.vals.len()),
            });
        }
    }
    Ok(())
}

fn bus_number(v: f64, line: usize) -> Result<usize, CaseError> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e12 {
        Ok(v as usize)
    } else {
        Err(CaseError::Invalid {
            line,
            msg: format!("bus number `{v}` is not a positive integer"),
        })
    }
}

fn invalid(line: usize, msg: impl Into<String>) -> CaseError {
    CaseError::Invalid {
        line,
        msg: msg.into(),
    }
}

/// Parses MATPOWER case text into a validated per-unit [`NetworkCase`].
///
/// Out-of-service generators and branches and isolated (type 4) buses are
/// dropped. A type-2 bus without an in-service generator becomes a load bus.
/// Only polynomial costs of degree ≤ 2 are accepted.
pub fn parse_case<T: Scalar>(text: &str) -> Result<NetworkCase<T>, CaseError> {
    let mut sec = scan(text)?;
    let (_, base) = sec.base_mva.ok_or(CaseError::Missing("baseMVA"))?;
    if !(base > 0.0 && base.is_finite()) {
        return Err(invalid(sec.base_mva.unwrap().0, "baseMVA must be positive"));
    }
    let bus_rows = sec.matrices.remove("bus").ok_or(CaseError::Missing("bus"))?;
    let gen_rows = sec.matrices.remove("gen").ok_or(CaseError::Missing("gen"))?;
    let br_rows = sec
        .matrices
        .remove("branch")
        .ok_or(CaseError::Missing("branch"))?;
    let cost_rows = sec.matrices.remove("gencost").unwrap_or_default();
    need_cols(&bus_rows, 13, "bus")?;
    need_cols(&gen_rows, 10, "gen")?;
    need_cols(&br_rows, 11, "branch")?;
    need_cols(&cost_rows, 4, "gencost")?;
    if !cost_rows.is_empty() && cost_rows.len() < gen_rows.len() {
        return Err(invalid(
            cost_rows[0].line,
            format!(
                "{} gencost rows for {} generators",
                cost_rows.len(),
                gen_rows.len()
            ),
        ));
    }
    if cost_rows.is_empty() {
        log::warn!("case has no gencost; all costs are zero");
    }

    let pu = |v: f64| T::lit(v / base);
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut isolated: BTreeMap<usize, usize> = BTreeMap::new();
    let mut buses: Vec<Bus<T>> = Vec::new();
    let mut types = Vec::new();
    for r in &bus_rows {
        let v = &r.vals;
        let id = bus_number(v[0], r.line)?;
        if index.contains_key(&id) || isolated.contains_key(&id) {
            return Err(CaseError::DuplicateBus { line: r.line, id });
        }
        let ty = v[1];
        if ty == 4.0 {
            isolated.insert(id, r.line);
            continue;
        }
        if ![1.0, 2.0, 3.0].contains(&ty) {
            return Err(invalid(r.line, format!("unknown bus type `{ty}`")));
        }
        let (vmax, vmin) = (v[11], v[12]);
        if !(vmin > 0.0 && vmin <= vmax) {
            return Err(invalid(
                r.line,
                format!("voltage bounds [{vmin}, {vmax}] violate 0 < Vmin <= Vmax"),
            ));
        }
        index.insert(id, buses.len());
        types.push(ty as u8);
        buses.push(Bus {
            id,
            kind: BusKind::Load,
            pd: pu(v[2]),
            qd: pu(v[3]),
            vmin: T::lit(vmin),
            vmax: T::lit(vmax),
            gsh: pu(v[4]),
            bsh: pu(v[5]),
            vm: T::lit(v[7]),
            va: T::lit(v[8].to_radians()),
            base_kv: T::lit(v[9]),
        });
    }
    let lookup = |id: f64, line: usize| -> Result<Option<usize>, CaseError> {
        let id = bus_number(id, line)?;
        match index.get(&id) {
            Some(&k) => Ok(Some(k)),
            None if isolated.contains_key(&id) => Ok(None),
            None => Err(CaseError::DanglingBus { line, id }),
        }
    };

    let mut generators = Vec::new();
    for (k, r) in gen_rows.iter().enumerate() {
        let v = &r.vals;
        let Some(bus) = lookup(v[0], r.line)? else {
            continue;
        };
        if v[7] <= 0.0 {
            continue;
        }
        let (qmax, qmin, pmax, pmin) = (v[3], v[4], v[8], v[9]);
        if pmin > pmax {
            return Err(invalid(r.line, format!("Pmin {pmin} exceeds Pmax {pmax}")));
        }
        if qmin > qmax {
            return Err(invalid(r.line, format!("Qmin {qmin} exceeds Qmax {qmax}")));
        }
        let (a, b, c) = match cost_rows.get(k) {
            None => (0.0, 0.0, 0.0),
            Some(cr) => {
                let cv = &cr.vals;
                if cv[0] != 2.0 {
                    return Err(invalid(cr.line, "only polynomial (model 2) costs are supported"));
                }
                let n = cv[3];
                if !(n >= 0.0 && n <= 3.0 && n.fract() == 0.0) {
                    return Err(invalid(cr.line, format!("unsupported cost order n = {n}")));
                }
                let n = n as usize;
                if cv.len() < 4 + n {
                    return Err(CaseError::Syntax {
                        line: cr.line,
                        msg: format!("gencost row lists fewer than {n} coefficients"),
                    });
                }
                let mut coef = [0.0; 3];
                for j in 0..n {
                    coef[3 - n + j] = cv[4 + j];
                }
                if coef[0] < 0.0 {
                    return Err(invalid(cr.line, "negative quadratic cost coefficient"));
                }
                (coef[0] * (base * base), coef[1] * base, coef[2])
            }
        };
        generators.push(Generator {
            bus,
            pg: pu(v[1]),
            qg: pu(v[2]),
            vg: T::lit(v[5]),
            pmin: pu(pmin),
            pmax: pu(pmax),
            qmin: pu(qmin),
            qmax: pu(qmax),
            a: T::lit(a),
            b: T::lit(b),
            c: T::lit(c),
        });
    }

    let mut branches = Vec::new();
    for r in &br_rows {
        let v = &r.vals;
        let (Some(from), Some(to)) = (lookup(v[0], r.line)?, lookup(v[1], r.line)?) else {
            continue;
        };
        if v[10] <= 0.0 {
            continue;
        }
        if from == to {
            return Err(invalid(r.line, "branch connects a bus to itself"));
        }
        if v[2] == 0.0 && v[3] == 0.0 {
            return Err(invalid(r.line, "zero-impedance branch"));
        }
        let tap = if v[8] == 0.0 { 1.0 } else { v[8] };
        if tap < 0.0 {
            return Err(invalid(r.line, "negative tap ratio"));
        }
        branches.push(Branch {
            from,
            to,
            r: T::lit(v[2]),
            x: T::lit(v[3]),
            b_ch: T::lit(v[4]),
            tap: T::lit(tap),
            shift: T::lit(v[9].to_radians()),
            rate: (v[5] > 0.0).then(|| pu(v[5])),
        });
    }

    let mut has_gen = vec![false; buses.len()];
    for g in &generators {
        has_gen[g.bus] = true;
    }
    let slacks: Vec<usize> = (0..buses.len()).filter(|&i| types[i] == 3).collect();
    match slacks.len() {
        0 => return Err(CaseError::NoSlack),
        1 => {}
        _ => return Err(CaseError::MultipleSlack(slacks.iter().map(|&i| buses[i].id).collect())),
    }
    for (i, bus) in buses.iter_mut().enumerate() {
        bus.kind = match types[i] {
            3 => BusKind::Slack,
            2 if has_gen[i] => BusKind::Generator,
            _ => BusKind::Load,
        };
    }
    let slack = slacks[0];
    if !has_gen[slack] {
        let line = bus_rows
            .iter()
            .find(|r| r.vals[0] as usize == buses[slack].id)
            .map_or(0, |r| r.line);
        return Err(invalid(line, "slack bus has no in-service generator"));
    }

    let case = NetworkCase {
        name: sec.name.unwrap_or_else(|| "case".into()),
        base_mva: T::lit(base),
        buses,
        generators,
        branches,
    };
    let comps = case.components();
    if comps.len() > 1 {
        let example = comps
            .iter()
            .find(|c| !c.contains(&slack))
            .map(|c| case.buses[c[0]].id)
            .unwrap_or(0);
        return Err(CaseError::Disconnected {
            components: comps.len(),
            example,
        });
    }
    Ok(case)
}

/// The `f64` closest to `guess` that `forward` maps exactly onto `target`,
/// so that written values parse back to identical per-unit data.
fn preimage<T: Scalar>(target: T, guess: f64, forward: impl Fn(f64) -> f64) -> f64 {
    if !guess.is_finite() || T::lit(forward(guess)) == target {
        return guess;
    }
    let step = |x: f64, up: bool| {
        let bits = x.to_bits() as i64;
        let d = if (x >= 0.0) == up { 1 } else { -1 };
        f64::from_bits((bits + d) as u64)
    };
    let (mut lo, mut hi) = (guess, guess);
    for _ in 0..8 {
        lo = step(lo, false);
        hi = step(hi, true);
        for c in [lo, hi] {
            if T::lit(forward(c)) == target {
                return c;
            }
        }
    }
    guess
}

/// Writes a case back as MATPOWER text that [`parse_case`] reads to an
/// identical structure.
pub fn write_case<T: Scalar>(case: &NetworkCase<T>) -> String {
    let base = case.base_mva.as_f64();
    let mw = |v: T| preimage(v, v.as_f64() * base, |m| m / base);
    let mut o = String::new();
    let _ = writeln!(o, "function mpc = {}", case.name);
    let _ = writeln!(o, "mpc.version = '2';");
    let _ = writeln!(o, "mpc.baseMVA = {base};");
    let _ = writeln!(o, "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin");
    let _ = writeln!(o, "mpc.bus = [");
    for b in &case.buses {
        let ty = match b.kind {
            BusKind::Slack => 3,
            BusKind::Generator => 2,
            BusKind::Load => 1,
        };
        let va = preimage(b.va, b.va.as_f64().to_degrees(), f64::to_radians);
        let _ = writeln!(
            o,
            "\t{}\t{ty}\t{}\t{}\t{}\t{}\t1\t{}\t{va}\t{}\t1\t{}\t{};",
            b.id,
            mw(b.pd),
            mw(b.qd),
            mw(b.gsh),
            mw(b.bsh),
            b.vm,
            b.base_kv,
            b.vmax,
            b.vmin
        );
    }
    let _ = writeln!(o, "];\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin");
    let _ = writeln!(o, "mpc.gen = [");
    for g in &case.generators {
        let _ = writeln!(
            o,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{base}\t1\t{}\t{};",
            case.buses[g.bus].id,
            mw(g.pg),
            mw(g.qg),
            mw(g.qmax),
            mw(g.qmin),
            g.vg,
            mw(g.pmax),
            mw(g.pmin)
        );
    }
    let _ = writeln!(
        o,
        "];\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax"
    );
    let _ = writeln!(o, "mpc.branch = [");
    for br in &case.branches {
        let shift = preimage(br.shift, br.shift.as_f64().to_degrees(), f64::to_radians);
        let rate = br.rate.map_or(0.0, mw);
        let _ = writeln!(
            o,
            "\t{}\t{}\t{}\t{}\t{}\t{rate}\t0\t0\t{}\t{shift}\t1\t-360\t360;",
            case.buses[br.from].id,
            case.buses[br.to].id,
            br.r,
            br.x,
            br.b_ch,
            br.tap
        );
    }
    let _ = writeln!(o, "];\n%\t2\tstartup\tshutdown\tn\tc2\tc1\tc0");
    let _ = writeln!(o, "mpc.gencost = [");
    let b2 = base * base;
    for g in &case.generators {
        let c2 = preimage(g.a, g.a.as_f64() / b2, |m| m * b2);
        let c1 = preimage(g.b, g.b.as_f64() / base, |m| m * base);
        let _ = writeln!(o, "\t2\t0\t0\t3\t{c2}\t{c1}\t{};", g.c);
    }
    o.push_str("];\n");
    o
}
