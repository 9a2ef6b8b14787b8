//! Update/query scripts replayed through a dynamic formula.
//!
//! One command per line, indices 1-based, inputs by name or number:
//!
//! ```text
//! set k i j val
//! setcol k j v1,v2,...
//! setrow k i v1,v2,...
//! get r c
//! getrow r
//! getcol c
//! commit
//! ```

use matformula::field::parse_scalar;
use matformula::{DynamicFormula, Error, Field, Formula, Result, UpdateEvent};

#[derive(Clone, Debug, PartialEq)]
pub enum Command<F> {
    Update(UpdateEvent<F>),
    Get(usize, usize),
    GetRow(usize),
    GetCol(usize),
    Commit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Line<F> {
    pub number: usize,
    pub text: String,
    pub command: Command<F>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: 1,
        message: message.into(),
    }
}

fn index(tok: &str, bound: usize, what: &str, line: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 && v <= bound => Ok(v - 1),
        _ => Err(err(line, format!("{what} `{tok}` outside 1..={bound}"))),
    }
}

fn scalar<F: Field>(tok: &str, line: usize) -> Result<F> {
    parse_scalar(tok).ok_or_else(|| err(line, format!("bad number `{tok}`")))
}

fn list<F: Field>(tok: &str, len: usize, line: usize) -> Result<Vec<F>> {
    let v: Vec<F> = tok.split(',').map(|t| scalar(t.trim(), line)).collect::<Result<_>>()?;
    if v.len() != len {
        return Err(err(line, format!("expected {len} values, found {}", v.len())));
    }
    Ok(v)
}

pub fn parse<F: Field>(formula: &Formula<F>, text: &str) -> Result<Vec<Line<F>>> {
    let (rows, cols) = formula.output_dims();
    let input = |tok: &str, line: usize| -> Result<usize> {
        if let Some(k) = formula.input_index(tok) {
            return Ok(k);
        }
        index(tok, formula.inputs().len(), "input", line)
    };
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let arity = |n: usize| {
            if toks.len() == n + 1 {
                Ok(())
            } else {
                Err(err(number, format!("`{}` takes {n} arguments", toks[0])))
            }
        };
        let command = match toks[0] {
            "set" => {
                arity(4)?;
                let k = input(toks[1], number)?;
                let d = &formula.inputs()[k];
                let i = index(toks[2], d.rows, "row", number)?;
                let j = index(toks[3], d.cols, "column", number)?;
                Command::Update(UpdateEvent::entry(k, i, j, scalar(toks[4], number)?))
            }
            "setcol" => {
                arity(3)?;
                let k = input(toks[1], number)?;
                let d = &formula.inputs()[k];
                let j = index(toks[2], d.cols, "column", number)?;
                Command::Update(UpdateEvent::column(k, j, list(toks[3], d.rows, number)?))
            }
            "setrow" => {
                arity(3)?;
                let k = input(toks[1], number)?;
                let d = &formula.inputs()[k];
                let i = index(toks[2], d.rows, "row", number)?;
                Command::Update(UpdateEvent::row(k, i, list(toks[3], d.cols, number)?))
            }
            "get" => {
                arity(2)?;
                Command::Get(index(toks[1], rows, "row", number)?, index(toks[2], cols, "column", number)?)
            }
            "getrow" => {
                arity(1)?;
                Command::GetRow(index(toks[1], rows, "row", number)?)
            }
            "getcol" => {
                arity(1)?;
                Command::GetCol(index(toks[1], cols, "column", number)?)
            }
            "commit" => {
                arity(0)?;
                Command::Commit
            }
            other => return Err(err(number, format!("unknown command `{other}`"))),
        };
        out.push(Line {
            number,
            text: body.to_string(),
            command,
        });
    }
    Ok(out)
}

/// Answer to one query line.
#[derive(Clone, Debug, PartialEq)]
pub struct Answer<F> {
    pub line: usize,
    pub query: String,
    pub values: Vec<F>,
}

/// Replays `script`, stopping at the first failing update.
pub fn replay<F: Field>(df: &mut DynamicFormula<F>, script: &[Line<F>]) -> (Vec<Answer<F>>, Result<()>) {
    let mut answers = Vec::new();
    for l in script {
        let values = match &l.command {
            Command::Update(ev) => {
                if let Err(e) = df.apply(std::slice::from_ref(ev)) {
                    return (answers, Err(e));
                }
                continue;
            }
            Command::Commit => {
                df.commit();
                continue;
            }
            Command::Get(r, c) => vec![df.get_entry(*r, *c)],
            Command::GetRow(r) => df.get_row(*r),
            Command::GetCol(c) => df.get_column(*c),
        };
        answers.push(Answer {
            line: l.number,
            query: l.text.clone(),
            values,
        });
    }
    (answers, Ok(()))
}
