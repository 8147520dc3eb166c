use crate::expr::{BinOp, Expr, Quantifier, UnOp};

use super::{PredError, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Type {
    Bool,
    Int,
    Label,
}

#[derive(Clone, Debug)]
enum Node {
    Const(i64),
    Slot(usize),
    Not(Box<Node>),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Quant {
        forall: bool,
        slot: usize,
        lo: i64,
        hi: i64,
        body: Box<Node>,
    },
}

/// An expression resolved against a [`Universe`]: names become slots and
/// labels become integer codes. Booleans evaluate to 0/1.
#[derive(Clone, Debug)]
pub struct Compiled {
    root: Node,
    ty: Type,
    width: usize,
    scratch: usize,
}

struct Scope<'a> {
    universe: &'a Universe,
    bound: Vec<String>,
    max_depth: usize,
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Result<(usize, Type), PredError> {
        if let Some(pos) = self.bound.iter().rposition(|b| b == name) {
            return Ok((self.universe.len() + pos, Type::Int));
        }
        match self.universe.slot(name) {
            Some(s) => Ok((s, self.universe.vars()[s].domain.ty())),
            None => Err(PredError::UnknownVar(name.to_string())),
        }
    }

    fn build(&mut self, e: &Expr) -> Result<(Node, Type), PredError> {
        Ok(match e {
            Expr::Bool(b) => (Node::Const(*b as i64), Type::Bool),
            Expr::Int(n) => (Node::Const(*n), Type::Int),
            Expr::Var(name) => {
                let (slot, ty) = self.lookup(name)?;
                (Node::Slot(slot), ty)
            }
            Expr::Label(name) => {
                let code = self
                    .universe
                    .label_code(name)
                    .ok_or_else(|| PredError::UnknownLabel(name.clone()))?;
                (Node::Const(code), Type::Label)
            }
            Expr::Unary(UnOp::Not, inner) => {
                let (n, t) = self.build(inner)?;
                expect(t, Type::Bool, "operand of `!`")?;
                (Node::Not(Box::new(n)), Type::Bool)
            }
            Expr::Unary(UnOp::Neg, inner) => {
                let (n, t) = self.build(inner)?;
                expect(t, Type::Int, "operand of unary `-`")?;
                (Node::Neg(Box::new(n)), Type::Int)
            }
            Expr::Binary(op, l, r) => {
                let (ln, lt) = self.build(l)?;
                let (rn, rt) = self.build(r)?;
                let ty = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        expect(lt, Type::Int, op.symbol())?;
                        expect(rt, Type::Int, op.symbol())?;
                        Type::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        expect(lt, Type::Int, op.symbol())?;
                        expect(rt, Type::Int, op.symbol())?;
                        Type::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if lt != rt {
                            return Err(PredError::Type(format!(
                                "cannot compare {lt:?} with {rt:?} in `{e}`"
                            )));
                        }
                        Type::Bool
                    }
                    BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                        expect(lt, Type::Bool, op.symbol())?;
                        expect(rt, Type::Bool, op.symbol())?;
                        Type::Bool
                    }
                };
                (Node::Bin(*op, Box::new(ln), Box::new(rn)), ty)
            }
            Expr::Quant(q, v, lo, hi, body) => {
                self.bound.push(v.clone());
                self.max_depth = self.max_depth.max(self.bound.len());
                let slot = self.universe.len() + self.bound.len() - 1;
                let (bn, bt) = self.build(body)?;
                self.bound.pop();
                expect(bt, Type::Bool, "quantifier body")?;
                (
                    Node::Quant {
                        forall: *q == Quantifier::Forall,
                        slot,
                        lo: *lo,
                        hi: *hi,
                        body: Box::new(bn),
                    },
                    Type::Bool,
                )
            }
        })
    }
}

fn expect(got: Type, want: Type, what: &str) -> Result<(), PredError> {
    if got == want {
        Ok(())
    } else {
        Err(PredError::Type(format!("{what}: expected {want:?}, found {got:?}")))
    }
}

pub(super) fn type_of(universe: &Universe, e: &Expr) -> Result<Type, PredError> {
    let mut scope = Scope { universe, bound: Vec::new(), max_depth: 0 };
    scope.build(e).map(|(_, t)| t)
}

impl Compiled {
    pub fn new(universe: &Universe, e: &Expr) -> Result<Self, PredError> {
        let mut scope = Scope { universe, bound: Vec::new(), max_depth: 0 };
        let (root, ty) = scope.build(e)?;
        Ok(Compiled { root, ty, width: universe.len(), scratch: scope.max_depth })
    }

    pub fn ty(&self) -> Type {
        self.ty
    }

    /// Evaluates against raw slot values (length = universe size).
    pub fn eval(&self, values: &[i64]) -> Result<i64, PredError> {
        if self.scratch == 0 {
            return eval(&self.root, values);
        }
        let mut env = Vec::with_capacity(self.width + self.scratch);
        env.extend_from_slice(&values[..self.width]);
        env.resize(self.width + self.scratch, 0);
        eval_mut(&self.root, &mut env)
    }

    pub fn eval_bool(&self, values: &[i64]) -> Result<bool, PredError> {
        if self.ty != Type::Bool {
            return Err(PredError::Type(format!("expected a predicate, found {:?}", self.ty)));
        }
        Ok(self.eval(values)? != 0)
    }
}

fn arith(op: BinOp, a: i64, b: i64) -> Result<i64, PredError> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Eq => Some((a == b) as i64),
        BinOp::Ne => Some((a != b) as i64),
        BinOp::Lt => Some((a < b) as i64),
        BinOp::Le => Some((a <= b) as i64),
        BinOp::Gt => Some((a > b) as i64),
        BinOp::Ge => Some((a >= b) as i64),
        BinOp::Iff => Some((a == b) as i64),
        BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("short-circuit ops"),
    };
    r.ok_or(PredError::Overflow)
}

fn eval(n: &Node, env: &[i64]) -> Result<i64, PredError> {
    Ok(match n {
        Node::Const(c) => *c,
        Node::Slot(s) => env[*s],
        Node::Not(a) => (eval(a, env)? == 0) as i64,
        Node::Neg(a) => eval(a, env)?.checked_neg().ok_or(PredError::Overflow)?,
        Node::Bin(BinOp::And, a, b) => (eval(a, env)? != 0 && eval(b, env)? != 0) as i64,
        Node::Bin(BinOp::Or, a, b) => (eval(a, env)? != 0 || eval(b, env)? != 0) as i64,
        Node::Bin(BinOp::Implies, a, b) => (eval(a, env)? == 0 || eval(b, env)? != 0) as i64,
        Node::Bin(op, a, b) => arith(*op, eval(a, env)?, eval(b, env)?)?,
        Node::Quant { .. } => unreachable!("quantifiers use the scratch environment"),
    })
}

fn eval_mut(n: &Node, env: &mut Vec<i64>) -> Result<i64, PredError> {
    Ok(match n {
        Node::Quant { forall, slot, lo, hi, body } => {
            let mut result = *forall;
            for k in *lo..=*hi {
                env[*slot] = k;
                let b = eval_mut(body, env)? != 0;
                if *forall && !b {
                    result = false;
                    break;
                }
                if !*forall && b {
                    result = true;
                    break;
                }
            }
            result as i64
        }
        Node::Const(_) | Node::Slot(_) => eval(n, env)?,
        Node::Not(a) => (eval_mut(a, env)? == 0) as i64,
        Node::Neg(a) => eval_mut(a, env)?.checked_neg().ok_or(PredError::Overflow)?,
        Node::Bin(BinOp::And, a, b) => (eval_mut(a, env)? != 0 && eval_mut(b, env)? != 0) as i64,
        Node::Bin(BinOp::Or, a, b) => (eval_mut(a, env)? != 0 || eval_mut(b, env)? != 0) as i64,
        Node::Bin(BinOp::Implies, a, b) => {
            (eval_mut(a, env)? == 0 || eval_mut(b, env)? != 0) as i64
        }
        Node::Bin(op, a, b) => {
            let x = eval_mut(a, env)?;
            let y = eval_mut(b, env)?;
            arith(*op, x, y)?
        }
    })
}
