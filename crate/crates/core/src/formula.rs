//! Dimension-checked matrix formulas.
//!
//! A formula is a tree whose leaves are constant matrices or input symbols
//! and whose inner nodes are `+`, `-`, `*` and inversion gates. Every node
//! carries its shape `(rows, cols)`.
//!
//! Inputs are named. Each leaf that refers to an input is its own input
//! node: writing `D*B*D` creates two input nodes bound to the same named
//! input `D`. The tree itself never shares subtrees.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{parse_scalar, Field};
use crate::matrix::DenseMatrix;

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind<F> {
    Constant(DenseMatrix<F>),
    /// Index into [`Formula::inputs`].
    Input(usize),
    Add,
    Sub,
    Mul,
    Inv,
}

impl<F> NodeKind<F> {
    pub fn arity(&self) -> usize {
        match self {
            NodeKind::Constant(_) | NodeKind::Input(_) => 0,
            NodeKind::Inv => 1,
            NodeKind::Add | NodeKind::Sub | NodeKind::Mul => 2,
        }
    }

    pub fn is_gate(&self) -> bool {
        self.arity() > 0
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            NodeKind::Constant(_) => "const",
            NodeKind::Input(_) => "input",
            NodeKind::Add => "+",
            NodeKind::Sub => "-",
            NodeKind::Mul => "*",
            NodeKind::Inv => "inv",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaNode<F> {
    pub kind: NodeKind<F>,
    pub children: Vec<NodeId>,
    pub rows: usize,
    pub cols: usize,
}

impl<F> FormulaNode<F> {
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

/// A validated matrix formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Formula<F> {
    nodes: Vec<FormulaNode<F>>,
    root: NodeId,
    inputs: Vec<InputDecl>,
}

impl<F: Field> Formula<F> {
    /// Validates the tree structure and all shape rules.
    pub fn new(nodes: Vec<FormulaNode<F>>, root: NodeId, inputs: Vec<InputDecl>) -> Result<Self> {
        let f = Formula { nodes, root, inputs };
        f.validate()?;
        Ok(f)
    }

    /// Parses the formula DSL.
    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text)?.parse_program()
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.root >= n {
            return Err(Error::InvalidFormula("root out of range".into()));
        }
        let mut parents = vec![0usize; n];
        for (id, node) in self.nodes.iter().enumerate() {
            if node.children.len() != node.kind.arity() {
                return Err(Error::InvalidFormula(format!(
                    "node {id} ({}) has {} children",
                    node.kind.symbol(),
                    node.children.len()
                )));
            }
            for &c in &node.children {
                if c >= n || c == id {
                    return Err(Error::InvalidFormula(format!("node {id} has invalid child {c}")));
                }
                parents[c] += 1;
            }
        }
        if parents[self.root] != 0 {
            return Err(Error::InvalidFormula("root has a parent".into()));
        }
        if let Some(id) = (0..n).find(|&id| id != self.root && parents[id] != 1) {
            return Err(Error::InvalidFormula(format!(
                "node {id} has {} parents; formulas are trees",
                parents[id]
            )));
        }
        // every node reachable from the root exactly once rules out cycles
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        let mut visited = 0;
        while let Some(id) = stack.pop() {
            if seen[id] {
                return Err(Error::InvalidFormula("cycle".into()));
            }
            seen[id] = true;
            visited += 1;
            stack.extend(&self.nodes[id].children);
        }
        if visited != n {
            return Err(Error::InvalidFormula("disconnected nodes".into()));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            self.check_shape(id, node)?;
        }
        Ok(())
    }

    fn check_shape(&self, id: NodeId, node: &FormulaNode<F>) -> Result<()> {
        let child = |k: usize| self.nodes[node.children[k]].dims();
        let own = node.dims();
        match &node.kind {
            NodeKind::Constant(m) => {
                if m.dims() != own {
                    return Err(Error::dim("const", own, m.dims()));
                }
            }
            NodeKind::Input(k) => {
                let decl = self
                    .inputs
                    .get(*k)
                    .ok_or_else(|| Error::InvalidFormula(format!("node {id} refers to unknown input {k}")))?;
                if (decl.rows, decl.cols) != own {
                    return Err(Error::dim(&decl.name, own, (decl.rows, decl.cols)));
                }
            }
            NodeKind::Add | NodeKind::Sub => {
                let (l, r) = (child(0), child(1));
                if l != r {
                    return Err(Error::dim(node.kind.symbol(), l, r));
                }
                if own != l {
                    return Err(Error::dim(node.kind.symbol(), own, l));
                }
            }
            NodeKind::Mul => {
                let (l, r) = (child(0), child(1));
                if l.1 != r.0 {
                    return Err(Error::dim("*", l, r));
                }
                if own != (l.0, r.1) {
                    return Err(Error::dim("*", own, (l.0, r.1)));
                }
            }
            NodeKind::Inv => {
                let c = child(0);
                if c.0 != c.1 {
                    return Err(Error::dim("inv", c, c));
                }
                if own != c {
                    return Err(Error::dim("inv", own, c));
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[FormulaNode<F>] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &FormulaNode<F> {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn inputs(&self) -> &[InputDecl] {
        &self.inputs
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|d| d.name == name)
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.nodes[self.root].dims()
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind.is_gate()).count()
    }

    /// Input nodes bound to input `k`, in post-order.
    pub fn occurrences(&self, k: usize) -> Vec<NodeId> {
        self.post_order()
            .into_iter()
            .filter(|&id| self.nodes[id].kind == NodeKind::Input(k))
            .collect()
    }

    /// Nodes in post-order, children left to right.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// `Σ (rows + cols)` over all nodes.
    pub fn size(&self) -> usize {
        self.nodes.iter().map(|n| n.rows + n.cols).sum()
    }

    /// Bottom-up evaluation.
    ///
    /// Fails with [`Error::NotExecutable`] naming the first inversion gate
    /// (in post-order) whose argument is singular.
    pub fn evaluate(&self, a: &Assignment<F>) -> Result<DenseMatrix<F>> {
        a.check(self)?;
        let mut values: Vec<Option<DenseMatrix<F>>> = vec![None; self.nodes.len()];
        for id in self.post_order() {
            let node = &self.nodes[id];
            let mut arg = |k: usize| values[node.children[k]].take().expect("child evaluated");
            let v = match &node.kind {
                NodeKind::Constant(m) => m.clone(),
                NodeKind::Input(k) => a.value(*k).clone(),
                NodeKind::Add => arg(0).add(&arg(1))?,
                NodeKind::Sub => arg(0).sub(&arg(1))?,
                NodeKind::Mul => arg(0).multiply(&arg(1))?,
                NodeKind::Inv => match arg(0).invert() {
                    Ok(m) => m,
                    Err(Error::Singular) => return Err(Error::NotExecutable { gate: id }),
                    Err(e) => return Err(e),
                },
            };
            values[id] = Some(v);
        }
        Ok(values[self.root].take().expect("root evaluated"))
    }

    /// Renders the formula back into DSL text.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for d in &self.inputs {
            out.push_str(&format!("input {}:{}x{}; ", d.name, d.rows, d.cols));
        }
        out.push_str("out ");
        self.write_expr(self.root, &mut out);
        out
    }

    fn write_expr(&self, id: NodeId, out: &mut String) {
        let node = &self.nodes[id];
        match &node.kind {
            NodeKind::Constant(m) => {
                let rows: Vec<String> = (0..m.rows())
                    .map(|i| {
                        let r: Vec<String> = m.row(i).iter().map(ToString::to_string).collect();
                        format!("[{}]", r.join(","))
                    })
                    .collect();
                if m.rows() == 0 || m.cols() == 0 {
                    out.push_str(&format!("zero({},{})", m.rows(), m.cols()));
                } else {
                    out.push_str(&format!("[{}]", rows.join(",")));
                }
            }
            NodeKind::Input(k) => out.push_str(&self.inputs[*k].name),
            NodeKind::Inv => {
                out.push_str("inv(");
                self.write_expr(node.children[0], out);
                out.push(')');
            }
            kind => {
                out.push('(');
                self.write_expr(node.children[0], out);
                out.push_str(&format!(" {} ", kind.symbol()));
                self.write_expr(node.children[1], out);
                out.push(')');
            }
        }
    }
}

/// Concrete values for the inputs of a formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<F> {
    values: Vec<DenseMatrix<F>>,
}

impl<F: Field> Assignment<F> {
    pub fn new(formula: &Formula<F>, values: Vec<DenseMatrix<F>>) -> Result<Self> {
        let a = Assignment { values };
        a.check(formula)?;
        Ok(a)
    }

    /// All-zero assignment.
    pub fn zeros(formula: &Formula<F>) -> Self {
        Assignment {
            values: formula
                .inputs()
                .iter()
                .map(|d| DenseMatrix::zeros(d.rows, d.cols))
                .collect(),
        }
    }

    fn check(&self, formula: &Formula<F>) -> Result<()> {
        if self.values.len() != formula.inputs.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} inputs",
                self.values.len(),
                formula.inputs.len()
            )));
        }
        for (v, d) in self.values.iter().zip(&formula.inputs) {
            if v.dims() != (d.rows, d.cols) {
                return Err(Error::dim(&d.name, (d.rows, d.cols), v.dims()));
            }
        }
        Ok(())
    }

    pub fn value(&self, k: usize) -> &DenseMatrix<F> {
        &self.values[k]
    }

    pub fn value_mut(&mut self, k: usize) -> &mut DenseMatrix<F> {
        &mut self.values[k]
    }

    pub fn values(&self) -> &[DenseMatrix<F>] {
        &self.values
    }

    /// Parses `name = [[..],..]` statements separated by `;`. Inputs not
    /// mentioned default to zero.
    pub fn parse(formula: &Formula<F>, text: &str) -> Result<Self> {
        let mut a = Self::zeros(formula);
        let mut p = Parser::<F>::new(text)?;
        while !p.at_end() {
            if p.eat_symbol(';') {
                continue;
            }
            let (name, line, column) = p.expect_ident()?;
            let k = formula.input_index(&name).ok_or(Error::Parse {
                line,
                column,
                message: format!("unknown input `{name}`"),
            })?;
            p.expect_symbol('=')?;
            let m = p.parse_literal()?;
            let decl = &formula.inputs[k];
            if m.dims() != (decl.rows, decl.cols) {
                return Err(Error::dim(&decl.name, (decl.rows, decl.cols), m.dims()));
            }
            a.values[k] = m;
        }
        Ok(a)
    }
}

/// Incremental construction of a [`Formula`], used by the parser and the
/// application drivers.
#[derive(Clone, Debug)]
pub struct FormulaBuilder<F> {
    nodes: Vec<FormulaNode<F>>,
    inputs: Vec<InputDecl>,
}

impl<F: Field> Default for FormulaBuilder<F> {
    fn default() -> Self {
        FormulaBuilder {
            nodes: Vec::new(),
            inputs: Vec::new(),
        }
    }
}

impl<F: Field> FormulaBuilder<F> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a named input and returns its index.
    pub fn declare(&mut self, name: &str, rows: usize, cols: usize) -> Result<usize> {
        if self.inputs.iter().any(|d| d.name == name) {
            return Err(Error::InvalidFormula(format!("input `{name}` declared twice")));
        }
        self.inputs.push(InputDecl {
            name: name.to_string(),
            rows,
            cols,
        });
        Ok(self.inputs.len() - 1)
    }

    pub fn input_dims(&self, k: usize) -> (usize, usize) {
        (self.inputs[k].rows, self.inputs[k].cols)
    }

    pub fn dims(&self, id: NodeId) -> (usize, usize) {
        self.nodes[id].dims()
    }

    /// A new leaf bound to input `k`.
    pub fn input(&mut self, k: usize) -> NodeId {
        let (rows, cols) = self.input_dims(k);
        self.push(NodeKind::Input(k), vec![], rows, cols)
    }

    pub fn constant(&mut self, m: DenseMatrix<F>) -> NodeId {
        let (rows, cols) = m.dims();
        self.push(NodeKind::Constant(m), vec![], rows, cols)
    }

    pub fn identity(&mut self, n: usize) -> NodeId {
        self.constant(DenseMatrix::identity(n))
    }

    pub fn zero(&mut self, rows: usize, cols: usize) -> NodeId {
        self.constant(DenseMatrix::zeros(rows, cols))
    }

    pub fn add(&mut self, l: NodeId, r: NodeId) -> Result<NodeId> {
        self.additive(NodeKind::Add, l, r)
    }

    pub fn sub(&mut self, l: NodeId, r: NodeId) -> Result<NodeId> {
        self.additive(NodeKind::Sub, l, r)
    }

    fn additive(&mut self, kind: NodeKind<F>, l: NodeId, r: NodeId) -> Result<NodeId> {
        let (ld, rd) = (self.dims(l), self.dims(r));
        if ld != rd {
            return Err(Error::dim(kind.symbol(), ld, rd));
        }
        Ok(self.push(kind, vec![l, r], ld.0, ld.1))
    }

    pub fn mul(&mut self, l: NodeId, r: NodeId) -> Result<NodeId> {
        let (ld, rd) = (self.dims(l), self.dims(r));
        if ld.1 != rd.0 {
            return Err(Error::dim("*", ld, rd));
        }
        Ok(self.push(NodeKind::Mul, vec![l, r], ld.0, rd.1))
    }

    pub fn inv(&mut self, c: NodeId) -> Result<NodeId> {
        let d = self.dims(c);
        if d.0 != d.1 {
            return Err(Error::dim("inv", d, d));
        }
        Ok(self.push(NodeKind::Inv, vec![c], d.0, d.1))
    }

    fn push(&mut self, kind: NodeKind<F>, children: Vec<NodeId>, rows: usize, cols: usize) -> NodeId {
        self.nodes.push(FormulaNode {
            kind,
            children,
            rows,
            cols,
        });
        self.nodes.len() - 1
    }

    pub fn finish(self, root: NodeId) -> Result<Formula<F>> {
        Formula::new(self.nodes, root, self.inputs)
    }
}

// ---------------------------------------------------------------------------
// DSL parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let mut take_while = |pred: &dyn Fn(char) -> bool| {
            let s = i;
            while i < chars.len() && pred(chars[i]) {
                i += 1;
                col += 1;
            }
            chars[s..i].iter().collect::<String>()
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            Tok::Ident(take_while(&|c| c.is_ascii_alphanumeric() || c == '_'))
        } else if c.is_ascii_digit() {
            Tok::Number(take_while(&|c| c.is_ascii_digit() || c == '.'))
        } else if "+-*/();:=[],".contains(c) {
            i += 1;
            col += 1;
            Tok::Sym(c)
        } else {
            return Err(Error::Parse {
                line,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        };
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    Ok(out)
}

struct Parser<F> {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    builder: FormulaBuilder<F>,
    names: HashMap<String, Binding<F>>,
}

#[derive(Clone)]
enum Binding<F> {
    Input(usize),
    Const(DenseMatrix<F>),
}

impl<F: Field> Parser<F> {
    fn new(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.split('\n').collect();
        let eof = (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1);
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
            eof,
            builder: FormulaBuilder::new(),
            names: HashMap::new(),
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map_or(self.eof, |t| (t.line, t.column))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Parse {
            line,
            column,
            message: message.into(),
        })
    }

    fn eat_symbol(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, c: char) -> Result<()> {
        if self.eat_symbol(c) {
            Ok(())
        } else {
            self.error(format!("expected `{c}`"))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize)> {
        let (line, column) = self.here();
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok((s, line, column))
            }
            _ => self.error("expected a name"),
        }
    }

    fn expect_count(&mut self) -> Result<usize> {
        match self.peek().cloned() {
            Some(Tok::Number(s)) => match s.parse() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => self.error(format!("expected a count, found `{s}`")),
            },
            _ => self.error("expected a count"),
        }
    }

    fn parse_program(mut self) -> Result<Formula<F>> {
        let mut root = None;
        while !self.at_end() {
            if self.eat_symbol(';') {
                continue;
            }
            let (kw, line, column) = self.expect_ident()?;
            match kw.as_str() {
                "input" => self.parse_input_decl()?,
                "const" => self.parse_const_decl()?,
                "out" => {
                    if root.is_some() {
                        return Err(Error::Parse {
                            line,
                            column,
                            message: "more than one `out` statement".into(),
                        });
                    }
                    root = Some(self.parse_expr()?);
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: format!("unknown statement `{other}`"),
                    })
                }
            }
            if !self.at_end() && !self.eat_symbol(';') {
                return self.error("expected `;`");
            }
        }
        let Some(root) = root else {
            return self.error("missing `out` statement");
        };
        self.builder.finish(root)
    }

    fn parse_input_decl(&mut self) -> Result<()> {
        let (name, line, column) = self.expect_ident()?;
        self.expect_symbol(':')?;
        let rows = self.expect_count()?;
        // `2x3` lexes as Number("2") Ident("x3")
        let cols = match self.peek().cloned() {
            Some(Tok::Ident(s)) if s.starts_with('x') && s.len() > 1 => {
                self.pos += 1;
                match s[1..].parse() {
                    Ok(c) => c,
                    Err(_) => return self.error(format!("bad shape `{rows}{s}`")),
                }
            }
            Some(Tok::Ident(s)) if s == "x" => {
                self.pos += 1;
                self.expect_count()?
            }
            _ => return self.error("expected `<rows>x<cols>`"),
        };
        self.bind(&name, line, column)?;
        let k = self.builder.declare(&name, rows, cols)?;
        self.names.insert(name, Binding::Input(k));
        Ok(())
    }

    fn parse_const_decl(&mut self) -> Result<()> {
        let (name, line, column) = self.expect_ident()?;
        self.expect_symbol('=')?;
        let m = self.parse_literal()?;
        self.bind(&name, line, column)?;
        self.names.insert(name, Binding::Const(m));
        Ok(())
    }

    fn bind(&self, name: &str, line: usize, column: usize) -> Result<()> {
        if self.names.contains_key(name) || ["inv", "id", "zero", "input", "const", "out"].contains(&name) {
            return Err(Error::Parse {
                line,
                column,
                message: format!("name `{name}` already in use"),
            });
        }
        Ok(())
    }

    fn parse_expr(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_term()?;
        loop {
            if self.eat_symbol('+') {
                let rhs = self.parse_term()?;
                lhs = self.builder.add(lhs, rhs)?;
            } else if self.eat_symbol('-') {
                let rhs = self.parse_term()?;
                lhs = self.builder.sub(lhs, rhs)?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_term(&mut self) -> Result<NodeId> {
        let mut lhs = self.parse_factor()?;
        while self.eat_symbol('*') {
            let rhs = self.parse_factor()?;
            lhs = self.builder.mul(lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<NodeId> {
        match self.peek().cloned() {
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.parse_expr()?;
                self.expect_symbol(')')?;
                Ok(e)
            }
            Some(Tok::Sym('[')) => {
                let m = self.parse_literal()?;
                Ok(self.builder.constant(m))
            }
            Some(Tok::Ident(name)) => {
                let is_call = self.peek_at(1) == Some(&Tok::Sym('('));
                match (name.as_str(), is_call) {
                    ("inv", true) => {
                        self.pos += 2;
                        let e = self.parse_expr()?;
                        self.expect_symbol(')')?;
                        self.builder.inv(e)
                    }
                    ("id", true) => {
                        self.pos += 2;
                        let n = self.expect_count()?;
                        self.expect_symbol(')')?;
                        Ok(self.builder.identity(n))
                    }
                    ("zero", true) => {
                        self.pos += 2;
                        let r = self.expect_count()?;
                        self.expect_symbol(',')?;
                        let c = self.expect_count()?;
                        self.expect_symbol(')')?;
                        Ok(self.builder.zero(r, c))
                    }
                    _ => match self.names.get(&name).cloned() {
                        Some(Binding::Input(k)) => {
                            self.pos += 1;
                            Ok(self.builder.input(k))
                        }
                        Some(Binding::Const(m)) => {
                            self.pos += 1;
                            Ok(self.builder.constant(m))
                        }
                        None => self.error(format!("unknown name `{name}`")),
                    },
                }
            }
            _ => self.error("expected an expression"),
        }
    }

    /// `[[a,b],[c,d]]`; a flat `[a,b]` is a column vector.
    fn parse_literal(&mut self) -> Result<DenseMatrix<F>> {
        self.expect_symbol('[')?;
        if self.peek() == Some(&Tok::Sym('[')) {
            let mut rows = Vec::new();
            loop {
                self.expect_symbol('[')?;
                rows.push(self.parse_numbers()?);
                self.expect_symbol(']')?;
                if !self.eat_symbol(',') {
                    break;
                }
            }
            self.expect_symbol(']')?;
            let width = rows[0].len();
            if rows.iter().any(|r| r.len() != width) {
                return self.error("literal rows differ in length");
            }
            DenseMatrix::from_rows(rows)
        } else {
            let values = self.parse_numbers()?;
            self.expect_symbol(']')?;
            Ok(DenseMatrix::column_vector(values))
        }
    }

    fn parse_numbers(&mut self) -> Result<Vec<F>> {
        let mut out = vec![self.parse_number()?];
        while self.eat_symbol(',') {
            out.push(self.parse_number()?);
        }
        Ok(out)
    }

    fn parse_number(&mut self) -> Result<F> {
        let negative = self.eat_symbol('-');
        let mut text = match self.peek().cloned() {
            Some(Tok::Number(s)) => {
                self.pos += 1;
                s
            }
            _ => return self.error("expected a number"),
        };
        if self.eat_symbol('/') {
            match self.peek().cloned() {
                Some(Tok::Number(d)) => {
                    self.pos += 1;
                    text = format!("{text}/{d}");
                }
                _ => return self.error("expected a denominator"),
            }
        }
        if negative {
            text.insert(0, '-');
        }
        match parse_scalar::<F>(&text) {
            Some(v) => Ok(v),
            None => self.error(format!("invalid number `{text}`")),
        }
    }
}

impl<F: Field> fmt::Display for Formula<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}
