use crate::expr::{pc_var, BinOp, Expr, Quantifier, UnOp};
use crate::lang::{
    Block, Branch, Component, NamedPredicate, ProofNode, ProofScript, Program, Property, PropertyKind, Rule, Scope,
    Span, Stmt, StmtKind, VarDecl, VarType,
};

use super::lexer::{lex, Tok, Token};
use super::ParseError;

const KEYWORDS: &[&str] = &[
    "program", "instrumented", "var", "bool", "int", "shared", "local", "private", "aux", "pre", "invariant",
    "component", "end", "skip", "atomic", "if", "fi", "do", "od", "property", "unless", "leadsto",
    "postcondition", "deadlockfree", "proof", "by", "immediate", "implication", "transitivity", "via",
    "disjunction", "case", "for", "in", "impossibility", "disjunction_theorem", "cancellation", "on", "psp",
    "with", "induction", "completion", "forall", "exists", "true", "false",
];

pub(super) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    instrumented: bool,
    component: String,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(super) fn new(text: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0, instrumented: false, component: String::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::new(self.span(), msg.into()))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        let hit = self.is_sym(sym);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            self.unexpected(&format!("`{sym}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.bump() {
            Tok::Int(n) => Ok(if neg { -n } else { n }),
            _ => {
                self.pos -= 1;
                self.unexpected("an integer")
            }
        }
    }

    fn range(&mut self) -> PResult<(i64, i64)> {
        let lo = self.int()?;
        self.expect_sym("..")?;
        Ok((lo, self.int()?))
    }

    // ---- programs ----

    pub(super) fn program(&mut self) -> PResult<Program> {
        self.expect_kw("program")?;
        let name = self.ident()?;
        self.instrumented = self.eat_kw("instrumented");
        let mut p = Program {
            name,
            pre: crate::expr::TRUE,
            decls: vec![],
            components: vec![],
            invariants: vec![],
            properties: vec![],
            proofs: vec![],
            instrumented: self.instrumented,
        };
        let mut seen_pre = false;
        loop {
            let span = self.span();
            if self.eat_kw("var") {
                p.decls.extend(self.decl(span)?);
            } else if self.eat_kw("pre") {
                if seen_pre {
                    return Err(ParseError::new(span, "duplicate `pre`".into()));
                }
                seen_pre = true;
                p.pre = self.expr()?;
            } else if self.eat_kw("invariant") {
                let name = self.ident()?;
                self.expect_sym(":")?;
                p.invariants.push(NamedPredicate { name, pred: self.expr()?, span });
            } else if self.eat_kw("component") {
                p.components.push(self.component(span)?);
            } else if self.eat_kw("property") {
                p.properties.push(self.property(span)?);
            } else if self.is_kw("proof") {
                p.proofs.push(self.proof()?);
            } else if *self.peek() == Tok::Eof {
                return Ok(p);
            } else {
                return self.unexpected("a declaration");
            }
        }
    }

    pub(super) fn finish(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    pub(super) fn proofs_only(&mut self) -> PResult<Vec<ProofScript>> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            out.push(self.proof()?);
        }
        Ok(out)
    }

    fn decl(&mut self, span: Span) -> PResult<Vec<VarDecl>> {
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        self.expect_sym(":")?;
        let ty = if self.eat_kw("bool") {
            VarType::Bool
        } else if self.eat_kw("int") {
            let (lo, hi) = self.range()?;
            VarType::Int { lo, hi }
        } else {
            return self.unexpected("a domain (`bool` or `int lo..hi`)");
        };
        let mut scope = Scope::Shared;
        let mut aux = false;
        loop {
            if self.eat_kw("shared") {
                scope = Scope::Shared;
            } else if self.eat_kw("local") {
                scope = Scope::Local(self.ident()?);
            } else if self.eat_kw("private") {
                scope = Scope::Private(self.ident()?);
            } else if self.eat_kw("aux") {
                aux = true;
            } else {
                break;
            }
        }
        Ok(names
            .into_iter()
            .map(|name| VarDecl { name, ty: ty.clone(), scope: scope.clone(), aux, span })
            .collect())
    }

    fn component(&mut self, span: Span) -> PResult<Component> {
        let name = self.ident()?;
        self.component = name.clone();
        let (body, final_label) = self.block(true)?;
        self.expect_kw("end")?;
        Ok(Component { name, body, final_label, span })
    }

    fn at_block_end(&self) -> bool {
        self.is_kw("end") || self.is_kw("fi") || self.is_kw("od") || self.is_sym("[]") || *self.peek() == Tok::Eof
    }

    fn label_ahead(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Int(_)) && matches!(self.peek_at(1), Tok::Sym(":"))
    }

    /// A `;`-separated statement list. A trailing item without a statement
    /// carries the block's final assertions and, at component level only,
    /// an explicit final label.
    fn block(&mut self, top: bool) -> PResult<(Block, Option<String>)> {
        let mut block = Block::new(vec![]);
        let mut final_label = None;
        loop {
            let span = self.span();
            let mut assertions = Vec::new();
            while self.eat_sym("{") {
                assertions.push(self.expr()?);
                self.expect_sym("}")?;
            }
            let label = if self.label_ahead() {
                let l = match self.bump() {
                    Tok::Ident(s) => s,
                    Tok::Int(n) => n.to_string(),
                    _ => unreachable!(),
                };
                self.bump();
                Some(l)
            } else {
                None
            };
            if self.at_block_end() {
                if label.is_some() && !top {
                    return Err(ParseError::new(span, "a final label is only allowed at the end of a component".into()));
                }
                block.post = assertions;
                final_label = label;
                break;
            }
            let kind = self.stmt_kind()?;
            block.stmts.push(Stmt { label, assertions, kind, span });
            if !self.eat_sym(";") {
                break;
            }
        }
        if self.instrumented {
            self.strip_counters(&mut block);
        }
        Ok((block, final_label))
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        if self.eat_kw("skip") {
            return Ok(StmtKind::Skip);
        }
        if self.eat_kw("atomic") {
            let (mut body, _) = self.block(false)?;
            self.expect_kw("end")?;
            if self.instrumented {
                if let Some(last) = body.stmts.last() {
                    if self.is_transfer(last) {
                        body.stmts.pop();
                    }
                }
                if body.stmts.is_empty() {
                    body.stmts.push(Stmt::new(StmtKind::Skip));
                }
            }
            return Ok(StmtKind::Atomic(body));
        }
        if self.eat_kw("if") {
            let bs = self.branches()?;
            self.expect_kw("fi")?;
            return Ok(StmtKind::If(bs));
        }
        if self.eat_kw("do") {
            let mut bs = self.branches()?;
            self.expect_kw("od")?;
            if self.instrumented && bs.len() > 1 && bs.last().is_some_and(|b| b.body.stmts.is_empty()) {
                bs.pop();
            }
            return Ok(StmtKind::Do(bs));
        }
        let mut targets = vec![self.target()?];
        while self.eat_sym(",") {
            targets.push(self.target()?);
        }
        self.expect_sym(":=")?;
        let mut values = vec![self.expr()?];
        while self.eat_sym(",") {
            values.push(self.expr()?);
        }
        if targets.len() != values.len() {
            return self.error(format!("{} targets but {} expressions", targets.len(), values.len()));
        }
        Ok(StmtKind::Assign(targets.into_iter().zip(values).collect()))
    }

    fn target(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Dotted(h, c) if h == "pc" => {
                self.bump();
                Ok(pc_var(&c))
            }
            _ => self.ident(),
        }
    }

    fn branches(&mut self) -> PResult<Vec<Branch>> {
        let mut out = Vec::new();
        loop {
            let guard = self.expr()?;
            self.expect_sym("->")?;
            let (body, _) = self.block(false)?;
            out.push(Branch { guard, body });
            if !self.eat_sym("[]") {
                return Ok(out);
            }
        }
    }

    fn is_transfer(&self, s: &Stmt) -> bool {
        let own = pc_var(&self.component);
        matches!(&s.kind, StmtKind::Assign(a) if a.len() == 1 && a[0].0 == own)
            && s.label.is_none()
            && s.assertions.is_empty()
    }

    /// Removes the explicit counter updates printed for an instrumented program.
    fn strip_counters(&self, block: &mut Block) {
        let own = pc_var(&self.component);
        if block.stmts.first().is_some_and(|s| self.is_transfer(s)) {
            block.stmts.remove(0);
        }
        for s in &mut block.stmts {
            if s.label.is_none() {
                continue;
            }
            if let StmtKind::Assign(a) = &mut s.kind {
                a.retain(|(x, _)| x != &own);
                if a.is_empty() {
                    s.kind = StmtKind::Skip;
                }
            }
        }
    }

    fn property(&mut self, span: Span) -> PResult<Property> {
        let name = self.ident()?;
        self.expect_sym(":")?;
        let kind = if self.eat_kw("postcondition") {
            PropertyKind::Postcondition(self.expr()?)
        } else if self.eat_kw("invariant") {
            PropertyKind::Invariant(self.expr()?)
        } else if self.eat_kw("deadlockfree") {
            PropertyKind::DeadlockFree
        } else {
            let p = self.expr()?;
            if self.eat_kw("unless") {
                PropertyKind::Unless(p, self.expr()?)
            } else if self.eat_kw("leadsto") {
                PropertyKind::LeadsTo(p, self.expr()?)
            } else {
                return self.unexpected("`unless` or `leadsto`");
            }
        };
        Ok(Property { name, kind, span })
    }

    // ---- proofs ----

    fn proof(&mut self) -> PResult<ProofScript> {
        let span = self.span();
        self.expect_kw("proof")?;
        let property = self.ident()?;
        let root = self.node()?;
        self.expect_kw("end")?;
        Ok(ProofScript { property, root, span })
    }

    fn node(&mut self) -> PResult<ProofNode> {
        let span = self.span();
        let from = self.expr()?;
        self.expect_kw("leadsto")?;
        let to = self.expr()?;
        self.expect_kw("by")?;
        let rule = self.rule()?;
        Ok(ProofNode { from, to, rule, span })
    }

    fn braced_nodes(&mut self) -> PResult<Vec<ProofNode>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            out.push(self.node()?);
        }
        Ok(out)
    }

    fn exactly<const N: usize>(&self, nodes: Vec<ProofNode>, rule: &str) -> PResult<[ProofNode; N]> {
        let n = nodes.len();
        nodes.try_into().or_else(|_| self.error(format!("`{rule}` takes {N} sub-proofs, found {n}")))
    }

    fn cases(&mut self) -> PResult<Vec<(Expr, ProofNode)>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            self.expect_kw("case")?;
            let p = self.expr()?;
            self.expect_sym(":")?;
            out.push((p, self.node()?));
        }
        Ok(out)
    }

    fn rule(&mut self) -> PResult<Rule> {
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return self.unexpected("a rule name"),
        };
        self.bump();
        Ok(match word.as_str() {
            "immediate" => match self.bump() {
                Tok::Dotted(c, l) => Rule::Immediate(format!("{c}.{l}")),
                _ => {
                    self.pos -= 1;
                    return self.unexpected("an action label such as `X.2`");
                }
            },
            "implication" => Rule::Implication,
            "transitivity" => {
                self.expect_kw("via")?;
                let mid = self.expr()?;
                let [a, b] = { let nodes = self.braced_nodes()?; self.exactly::<2>(nodes, "transitivity")? };
                Rule::Transitivity { mid, first: Box::new(a), second: Box::new(b) }
            }
            "disjunction" => {
                if self.eat_kw("for") {
                    let param = self.ident()?;
                    self.expect_kw("in")?;
                    let (lo, hi) = self.range()?;
                    let [t] = { let nodes = self.braced_nodes()?; self.exactly::<1>(nodes, "disjunction")? };
                    Rule::DisjunctionRange { param, lo, hi, template: Box::new(t) }
                } else {
                    Rule::Disjunction(self.cases()?)
                }
            }
            "impossibility" => {
                let [n] = { let nodes = self.braced_nodes()?; self.exactly::<1>(nodes, "impossibility")? };
                Rule::Impossibility(Box::new(n))
            }
            "disjunction_theorem" => Rule::DisjunctionTheorem(self.braced_nodes()?),
            "cancellation" => {
                self.expect_kw("on")?;
                let d = self.expr()?;
                let [a, b] = { let nodes = self.braced_nodes()?; self.exactly::<2>(nodes, "cancellation")? };
                Rule::Cancellation { d, first: Box::new(a), second: Box::new(b) }
            }
            "psp" => {
                self.expect_kw("with")?;
                let r = self.expr()?;
                self.expect_kw("unless")?;
                let d = self.expr()?;
                let [n] = { let nodes = self.braced_nodes()?; self.exactly::<1>(nodes, "psp")? };
                Rule::Psp { r, d, sub: Box::new(n) }
            }
            "induction" => {
                self.expect_kw("on")?;
                let measure = self.expr()?;
                self.expect_kw("for")?;
                let param = self.ident()?;
                self.expect_kw("in")?;
                let (lo, hi) = self.range()?;
                let [t] = { let nodes = self.braced_nodes()?; self.exactly::<1>(nodes, "induction")? };
                Rule::Induction { measure, param, lo, hi, template: Box::new(t) }
            }
            "completion" => {
                self.expect_kw("unless")?;
                let d = self.expr()?;
                Rule::Completion { d, cases: self.cases()? }
            }
            other => {
                self.pos -= 1;
                return self.error(format!("unknown rule `{other}`"));
            }
        })
    }

    // ---- expressions ----

    pub(super) fn expr(&mut self) -> PResult<Expr> {
        let mut l = self.implication()?;
        while self.eat_sym("<=>") {
            l = Expr::iff(l, self.implication()?);
        }
        Ok(l)
    }

    fn implication(&mut self) -> PResult<Expr> {
        let l = self.disjunction()?;
        if self.eat_sym("==>") {
            return Ok(Expr::implies(l, self.implication()?));
        }
        Ok(l)
    }

    fn disjunction(&mut self) -> PResult<Expr> {
        let mut l = self.conjunction()?;
        while self.eat_sym("||") {
            l = Expr::or(l, self.conjunction()?);
        }
        Ok(l)
    }

    fn conjunction(&mut self) -> PResult<Expr> {
        let mut l = self.comparison()?;
        while self.eat_sym("&&") {
            l = Expr::and(l, self.comparison()?);
        }
        Ok(l)
    }

    fn cmp_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let l = self.sum()?;
        let Some(op) = self.cmp_op() else { return Ok(l) };
        self.bump();
        let r = self.sum()?;
        if self.cmp_op().is_some() {
            return self.error("comparisons do not chain; add parentheses");
        }
        if matches!(op, BinOp::Eq | BinOp::Ne) {
            let (l, r) = counter_labels(l, r);
            return Ok(Expr::bin(op, l, r));
        }
        Ok(Expr::bin(op, l, r))
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut l = self.product()?;
        loop {
            if self.eat_sym("+") {
                l = Expr::bin(BinOp::Add, l, self.product()?);
            } else if self.eat_sym("-") {
                l = Expr::bin(BinOp::Sub, l, self.product()?);
            } else {
                return Ok(l);
            }
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut l = self.unary()?;
        while self.eat_sym("*") {
            l = Expr::bin(BinOp::Mul, l, self.unary()?);
        }
        Ok(l)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("!") {
            return Ok(Expr::not(self.unary()?));
        }
        if self.eat_sym("-") {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(-n));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Dotted(h, t) => {
                self.bump();
                Ok(if h == "pc" { Expr::Var(pc_var(&t)) } else { Expr::Label(format!("{h}.{t}")) })
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Expr::Bool(w == "true"))
            }
            Tok::Ident(w) if w == "forall" || w == "exists" => {
                self.bump();
                let q = if w == "forall" { Quantifier::Forall } else { Quantifier::Exists };
                let v = self.ident()?;
                self.expect_kw("in")?;
                let (lo, hi) = self.range()?;
                self.expect_sym(":")?;
                Ok(Expr::Quant(q, v, lo, hi, Box::new(self.expr()?)))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            _ => self.unexpected("an expression"),
        }
    }
}

/// In `pc.X == 2` the literal names the label `X.2`.
fn counter_labels(l: Expr, r: Expr) -> (Expr, Expr) {
    let as_label = |pc: &Expr, other: Expr| match (pc, other) {
        (Expr::Var(v), Expr::Int(n)) if v.starts_with("pc.") => Expr::Label(format!("{}.{n}", &v[3..])),
        (_, other) => other,
    };
    let r2 = as_label(&l, r);
    let l2 = as_label(&r2, l);
    (l2, r2)
}
