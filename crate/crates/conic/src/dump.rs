//! Plain-text sparse dump of a [`ConicProgram`] for cross-checking with external solvers.
//!
//! ```text
//! conic-program 1
//! vars <n>
//! rows <m>
//! offset <c0>
//! cones <p>
//! <zero|nonneg|soc|rsoc> <dim>        (p lines, in row order)
//! objective <k>
//! <col> <value>                       (k lines, nonzeros of c)
//! matrix <nnz>
//! <row> <col> <value>                 (nnz lines, column-major)
//! rhs <k>
//! <row> <value>                       (k lines, nonzeros of b)
//! names <q>
//! <col> <name>                        (q lines)
//! end
//! ```
//!
//! The program is `min c'x + c0  s.t.  b - A x ∈ K`; indices are zero-based,
//! values are printed in shortest round-trip exponent form. A rotated block
//! `rsoc` constrains `(u, v, w)` by `2uv >= ||w||²`, `u, v >= 0`.

use std::fmt::Write as _;

use crate::cones::Cone;
use crate::program::{ConicProgram, VarMap};
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DumpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of input")]
    Eof,
}

pub fn write_program<T: Scalar>(p: &ConicProgram<T>) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "conic-program 1");
    let _ = writeln!(o, "vars {}", p.num_vars);
    let _ = writeln!(o, "rows {}", p.num_rows());
    let _ = writeln!(o, "offset {:e}", p.objective_offset);
    let _ = writeln!(o, "cones {}", p.cones.len());
    for c in &p.cones {
        let (tag, d) = match *c {
            Cone::Zero(d) => ("zero", d),
            Cone::NonNeg(d) => ("nonneg", d),
            Cone::SecondOrder(d) => ("soc", d),
            Cone::RotatedSecondOrder(d) => ("rsoc", d),
        };
        let _ = writeln!(o, "{tag} {d}");
    }
    let obj: Vec<(usize, T)> = p
        .objective
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != T::zero())
        .map(|(i, v)| (i, *v))
        .collect();
    let _ = writeln!(o, "objective {}", obj.len());
    for (i, v) in obj {
        let _ = writeln!(o, "{i} {v:e}");
    }
    let _ = writeln!(o, "matrix {}", p.a.nnz());
    for (r, c, v) in p.a.triplets() {
        let _ = writeln!(o, "{r} {c} {v:e}");
    }
    let rhs: Vec<(usize, T)> = p
        .b
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != T::zero())
        .map(|(i, v)| (i, *v))
        .collect();
    let _ = writeln!(o, "rhs {}", rhs.len());
    for (i, v) in rhs {
        let _ = writeln!(o, "{i} {v:e}");
    }
    let mut names: Vec<(&String, &usize)> = p.var_map.iter().collect();
    names.sort_by_key(|(_, c)| **c);
    let _ = writeln!(o, "names {}", names.len());
    for (name, col) in names {
        let _ = writeln!(o, "{col} {name}");
    }
    o.push_str("end\n");
    o
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>), DumpError> {
        for (i, l) in self.it.by_ref() {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            return Ok((i + 1, l.split_whitespace().collect()));
        }
        Err(DumpError::Eof)
    }

    fn header(&mut self, key: &str) -> Result<(usize, usize), DumpError> {
        let (line, toks) = self.next()?;
        if toks.len() != 2 || toks[0] != key {
            return Err(DumpError::Parse {
                line,
                msg: format!("expected `{key} <count>`"),
            });
        }
        Ok((line, num(line, toks[1])?))
    }
}

fn num<N: std::str::FromStr>(line: usize, tok: &str) -> Result<N, DumpError> {
    tok.parse().map_err(|_| DumpError::Parse {
        line,
        msg: format!("bad number `{tok}`"),
    })
}

pub fn read_program<T: Scalar>(text: &str) -> Result<ConicProgram<T>, DumpError> {
    let mut lines = Lines {
        it: text.lines().enumerate(),
    };
    let (line, toks) = lines.next()?;
    if toks != ["conic-program", "1"] {
        return Err(DumpError::Parse {
            line,
            msg: "missing `conic-program 1` header".into(),
        });
    }
    let (_, n) = lines.header("vars")?;
    let (_, m) = lines.header("rows")?;
    let (line, toks) = lines.next()?;
    if toks.len() != 2 || toks[0] != "offset" {
        return Err(DumpError::Parse {
            line,
            msg: "expected `offset <value>`".into(),
        });
    }
    let offset = T::lit(num::<f64>(line, toks[1])?);
    let (_, ncones) = lines.header("cones")?;
    let mut cones = Vec::with_capacity(ncones);
    for _ in 0..ncones {
        let (line, toks) = lines.next()?;
        if toks.len() != 2 {
            return Err(DumpError::Parse {
                line,
                msg: "expected `<kind> <dim>`".into(),
            });
        }
        let d: usize = num(line, toks[1])?;
        cones.push(match toks[0] {
            "zero" => Cone::Zero(d),
            "nonneg" => Cone::NonNeg(d),
            "soc" => Cone::SecondOrder(d),
            "rsoc" => Cone::RotatedSecondOrder(d),
            k => {
                return Err(DumpError::Parse {
                    line,
                    msg: format!("unknown cone `{k}`"),
                })
            }
        });
    }
    let (_, k) = lines.header("objective")?;
    let mut objective = vec![T::zero(); n];
    for _ in 0..k {
        let (line, t) = lines.next()?;
        let i: usize = num(line, t[0])?;
        if i >= n || t.len() != 2 {
            return Err(DumpError::Parse {
                line,
                msg: "bad objective entry".into(),
            });
        }
        objective[i] = T::lit(num(line, t[1])?);
    }
    let (_, nnz) = lines.header("matrix")?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (line, t) = lines.next()?;
        if t.len() != 3 {
            return Err(DumpError::Parse {
                line,
                msg: "expected `<row> <col> <value>`".into(),
            });
        }
        let (r, c): (usize, usize) = (num(line, t[0])?, num(line, t[1])?);
        if r >= m || c >= n {
            return Err(DumpError::Parse {
                line,
                msg: "matrix index out of range".into(),
            });
        }
        trip.push((r, c, T::lit(num(line, t[2])?)));
    }
    let (_, k) = lines.header("rhs")?;
    let mut b = vec![T::zero(); m];
    for _ in 0..k {
        let (line, t) = lines.next()?;
        let i: usize = num(line, t[0])?;
        if i >= m || t.len() != 2 {
            return Err(DumpError::Parse {
                line,
                msg: "bad rhs entry".into(),
            });
        }
        b[i] = T::lit(num(line, t[1])?);
    }
    let (_, q) = lines.header("names")?;
    let mut var_map = VarMap::new();
    for _ in 0..q {
        let (line, t) = lines.next()?;
        if t.len() != 2 {
            return Err(DumpError::Parse {
                line,
                msg: "expected `<col> <name>`".into(),
            });
        }
        var_map.insert(t[1].to_string(), num(line, t[0])?);
    }
    let (line, t) = lines.next()?;
    if t != ["end"] {
        return Err(DumpError::Parse {
            line,
            msg: "expected `end`".into(),
        });
    }
    Ok(ConicProgram {
        num_vars: n,
        objective,
        objective_offset: offset,
        a: CscMatrix::from_triplets(m, n, &trip),
        b,
        cones,
        var_map,
    })
}
