//! Flattened postfix evaluator used by the flow integrator, where the same
//! expressions are evaluated millions of times. Produces bit-identical
//! results to tree evaluation (same operations in the same order).

use super::{EvalError, EvalErrorKind, Node, ScalarExpr};

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Coord(usize),
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Add,
    Sub,
    Mul,
    Div,
    PowInt(i32),
    PowReal(f64),
}

/// Postfix instruction tape for one scalar expression.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    max_stack: usize,
}

impl CompiledExpr {
    pub fn new(expr: &ScalarExpr) -> Self {
        let mut ops = Vec::new();
        flatten(expr, &mut ops);
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Coord(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                _ => {}
            }
            max_stack = max_stack.max(depth);
        }
        CompiledExpr { ops, max_stack }
    }

    pub fn stack_size(&self) -> usize {
        self.max_stack
    }

    /// Evaluate on a caller-provided stack buffer (cleared on entry).
    pub fn eval_with(&self, point: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        self.eval_kind(point, stack).map_err(|kind| EvalError {
            kind,
            point: point.to_vec(),
        })
    }

    fn eval_kind(&self, point: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalErrorKind> {
        stack.clear();
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Coord(i) => stack.push(point[*i]),
                Op::Neg => {
                    let v = stack.last_mut().unwrap();
                    *v = -*v;
                }
                Op::Sin => {
                    let v = stack.last_mut().unwrap();
                    *v = v.sin();
                }
                Op::Cos => {
                    let v = stack.last_mut().unwrap();
                    *v = v.cos();
                }
                Op::Exp => {
                    let v = stack.last_mut().unwrap();
                    *v = v.exp();
                }
                Op::Log => {
                    let v = stack.last_mut().unwrap();
                    if *v <= 0.0 {
                        return Err(EvalErrorKind::LogDomain);
                    }
                    *v = v.ln();
                }
                Op::Sqrt => {
                    let v = stack.last_mut().unwrap();
                    if *v < 0.0 {
                        return Err(EvalErrorKind::SqrtDomain);
                    }
                    *v = v.sqrt();
                }
                Op::Add => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a += b;
                }
                Op::Sub => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a -= b;
                }
                Op::Mul => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a *= b;
                }
                Op::Div => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    if b == 0.0 {
                        return Err(EvalErrorKind::DivisionByZero);
                    }
                    *a /= b;
                }
                Op::PowInt(n) => {
                    let v = stack.last_mut().unwrap();
                    if *n < 0 && *v == 0.0 {
                        return Err(EvalErrorKind::DivisionByZero);
                    }
                    *v = v.powi(*n);
                }
                Op::PowReal(r) => {
                    let v = stack.last_mut().unwrap();
                    if *v <= 0.0 {
                        return Err(EvalErrorKind::PowDomain);
                    }
                    *v = v.powf(*r);
                }
            }
        }
        let out = stack.pop().unwrap();
        if out.is_finite() {
            Ok(out)
        } else {
            Err(EvalErrorKind::NonFinite)
        }
    }
}

fn flatten(expr: &ScalarExpr, ops: &mut Vec<Op>) {
    match expr.node() {
        Node::Const(c) => ops.push(Op::Const(*c)),
        Node::Coord(i) => ops.push(Op::Coord(*i)),
        Node::Neg(u) => {
            flatten(u, ops);
            ops.push(Op::Neg);
        }
        Node::Sin(u) => {
            flatten(u, ops);
            ops.push(Op::Sin);
        }
        Node::Cos(u) => {
            flatten(u, ops);
            ops.push(Op::Cos);
        }
        Node::Exp(u) => {
            flatten(u, ops);
            ops.push(Op::Exp);
        }
        Node::Log(u) => {
            flatten(u, ops);
            ops.push(Op::Log);
        }
        Node::Sqrt(u) => {
            flatten(u, ops);
            ops.push(Op::Sqrt);
        }
        Node::Add(a, b) => {
            flatten(a, ops);
            flatten(b, ops);
            ops.push(Op::Add);
        }
        Node::Sub(a, b) => {
            flatten(a, ops);
            flatten(b, ops);
            ops.push(Op::Sub);
        }
        Node::Mul(a, b) => {
            flatten(a, ops);
            flatten(b, ops);
            ops.push(Op::Mul);
        }
        Node::Div(a, b) => {
            flatten(a, ops);
            flatten(b, ops);
            ops.push(Op::Div);
        }
        Node::PowInt(u, n) => {
            flatten(u, ops);
            ops.push(Op::PowInt(*n));
        }
        Node::PowReal(u, r) => {
            flatten(u, ops);
            ops.push(Op::PowReal(*r));
        }
    }
}
