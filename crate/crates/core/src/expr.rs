//! Expression trees shared by guards, assignments, assertions and properties.
//!
//! Names are kept textual: a plain identifier is a data variable (or a
//! quantifier-bound variable), `pc.X` is the program counter of component `X`,
//! and any other dotted name `X.l` is the label literal `l` of component `X`.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Iff => "<=>",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Var(String),
    Label(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Bounded quantifier over the inclusive literal range `lo..hi`.
    Quant(Quantifier, String, i64, i64, Box<Expr>),
}

pub const TRUE: Expr = Expr::Bool(true);
pub const FALSE: Expr = Expr::Bool(false);

pub fn pc_var(component: &str) -> String {
    format!("pc.{component}")
}

pub fn label_name(component: &str, id: &str) -> String {
    format!("{component}.{id}")
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn label(name: impl Into<String>) -> Expr {
        Expr::Label(name.into())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::And, l, r)
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Or, l, r)
    }

    pub fn implies(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Implies, l, r)
    }

    pub fn iff(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Iff, l, r)
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Eq, l, r)
    }

    /// `pc.<component> == <label>` where `label` is a full label name.
    pub fn at(component: &str, label: &str) -> Expr {
        Expr::eq(Expr::Var(pc_var(component)), Expr::Label(label.to_string()))
    }

    /// Left-nested conjunction; `true` for an empty list.
    pub fn conj(items: impl IntoIterator<Item = Expr>) -> Expr {
        items.into_iter().reduce(Expr::and).unwrap_or(TRUE)
    }

    /// Left-nested disjunction; `false` for an empty list.
    pub fn disj(items: impl IntoIterator<Item = Expr>) -> Expr {
        items.into_iter().reduce(Expr::or).unwrap_or(FALSE)
    }

    /// Top-level conjuncts, flattening nested `&&`.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Binary(BinOp::And, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Simultaneous substitution `self[x̄ := Ē]`. Bound variables shadow.
    pub fn subst(&self, bindings: &[(String, Expr)]) -> Expr {
        match self {
            Expr::Var(name) => bindings
                .iter()
                .find(|(v, _)| v == name)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(|| self.clone()),
            Expr::Bool(_) | Expr::Int(_) | Expr::Label(_) => self.clone(),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.subst(bindings))),
            Expr::Binary(op, l, r) => {
                Expr::Binary(*op, Box::new(l.subst(bindings)), Box::new(r.subst(bindings)))
            }
            Expr::Quant(q, v, lo, hi, body) => {
                let inner: Vec<(String, Expr)> =
                    bindings.iter().filter(|(x, _)| x != v).cloned().collect();
                Expr::Quant(*q, v.clone(), *lo, *hi, Box::new(body.subst(&inner)))
            }
        }
    }

    pub fn subst1(&self, var: &str, value: Expr) -> Expr {
        self.subst(&[(var.to_string(), value)])
    }

    /// Free variable names (including pc variables), excluding bound ones.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(n) => {
                if !bound.contains(n) {
                    out.insert(n.clone());
                }
            }
            Expr::Bool(_) | Expr::Int(_) | Expr::Label(_) => {}
            Expr::Unary(_, e) => e.collect_free(bound, out),
            Expr::Binary(_, l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Expr::Quant(_, v, _, _, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Label literals mentioned anywhere in the expression.
    pub fn labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Label(l) = e {
                out.insert(l.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.visit(f),
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Quant(_, _, _, _, b) => b.visit(f),
            _ => {}
        }
    }

    /// Constant folding. Never changes meaning; overflow is left unfolded.
    pub fn simplify(&self) -> Expr {
        use Expr::*;
        match self {
            Unary(op, e) => {
                let e = e.simplify();
                match (op, &e) {
                    (UnOp::Not, Bool(b)) => Bool(!b),
                    (UnOp::Not, Unary(UnOp::Not, inner)) => (**inner).clone(),
                    (UnOp::Neg, Int(n)) if *n != i64::MIN => Int(-n),
                    _ => Unary(*op, Box::new(e)),
                }
            }
            Binary(op, l, r) => {
                let l = l.simplify();
                let r = r.simplify();
                fold_binary(*op, l, r)
            }
            Quant(q, v, lo, hi, body) => {
                let body = body.simplify();
                if lo > hi {
                    return Bool(*q == Quantifier::Forall);
                }
                match body {
                    Bool(b) => Bool(b),
                    body => Quant(*q, v.clone(), *lo, *hi, Box::new(body)),
                }
            }
            _ => self.clone(),
        }
    }
}

fn fold_binary(op: BinOp, l: Expr, r: Expr) -> Expr {
    use Expr::*;
    match (op, &l, &r) {
        (BinOp::And, Bool(true), _) => r,
        (BinOp::And, _, Bool(true)) => l,
        (BinOp::And, Bool(false), _) | (BinOp::And, _, Bool(false)) => Bool(false),
        (BinOp::Or, Bool(false), _) => r,
        (BinOp::Or, _, Bool(false)) => l,
        (BinOp::Or, Bool(true), _) | (BinOp::Or, _, Bool(true)) => Bool(true),
        (BinOp::Implies, Bool(true), _) => r,
        (BinOp::Implies, Bool(false), _) | (BinOp::Implies, _, Bool(true)) => Bool(true),
        (BinOp::Implies, _, Bool(false)) => Expr::not(l).simplify(),
        (BinOp::Iff, Bool(a), Bool(b)) => Bool(a == b),
        (BinOp::Iff, Bool(true), _) => r,
        (BinOp::Iff, _, Bool(true)) => l,
        (_, Int(a), Int(b)) => {
            let (a, b) = (*a, *b);
            let folded = match op {
                BinOp::Add => a.checked_add(b).map(Int),
                BinOp::Sub => a.checked_sub(b).map(Int),
                BinOp::Mul => a.checked_mul(b).map(Int),
                BinOp::Eq => Some(Bool(a == b)),
                BinOp::Ne => Some(Bool(a != b)),
                BinOp::Lt => Some(Bool(a < b)),
                BinOp::Le => Some(Bool(a <= b)),
                BinOp::Gt => Some(Bool(a > b)),
                BinOp::Ge => Some(Bool(a >= b)),
                _ => None,
            };
            folded.unwrap_or_else(|| Expr::bin(op, l, r))
        }
        (BinOp::Eq, Label(a), Label(b)) => Bool(a == b),
        (BinOp::Ne, Label(a), Label(b)) => Bool(a != b),
        (BinOp::Eq, Bool(a), Bool(b)) => Bool(a == b),
        (BinOp::Ne, Bool(a), Bool(b)) => Bool(a != b),
        _ => Expr::bin(op, l, r),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, ctx: u8) -> fmt::Result {
    match e {
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Int(n) => {
            if *n < 0 && ctx > 0 {
                write!(f, "({n})")
            } else {
                write!(f, "{n}")
            }
        }
        Expr::Var(v) | Expr::Label(v) => write!(f, "{v}"),
        Expr::Unary(op, inner) => {
            f.write_str(match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
            })?;
            // `-1` would reparse as a literal and `--` opens a comment
            match (op, &**inner) {
                (UnOp::Neg, Expr::Int(_) | Expr::Unary(UnOp::Neg, _)) => {
                    f.write_str("(")?;
                    write_expr(f, inner, 0)?;
                    f.write_str(")")
                }
                _ => write_expr(f, inner, 8),
            }
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let paren = p < ctx;
            if paren {
                f.write_str("(")?;
            }
            // Left-associative except `==>`; comparisons do not chain.
            let (lp, rp) = match op {
                BinOp::Implies => (p + 1, p),
                _ if op.is_comparison() => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            write_expr(f, l, lp)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, r, rp)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Quant(q, v, lo, hi, body) => {
            if ctx > 0 {
                f.write_str("(")?;
            }
            let kw = match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            write!(f, "{kw} {v} in {lo}..{hi} : ")?;
            write_expr(f, body, 0)?;
            if ctx > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}
