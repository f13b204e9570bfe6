//! JSON instance format.
//!
//! ```text
//! {"name": str, "num_vars": int, "objective": [float],
//!  "objective_expr": expr (optional),
//!  "rows": [{"coefs": [[idx, float]], "rhs": float, "sense": ">="|"<="|"="}],
//!  "nonlinear": [{"expr": expr, "sense": "<=0"|">=0"|"=0"}],
//!  "lower": [float|"-inf"], "upper": [float|"inf"], "integers": [int]}
//! ```
//!
//! Expressions use prefix notation: a number is a constant, `"x3"` is the
//! variable with index 3, and arrays are `["+", e...]`, `["-", e]`,
//! `["-", a, b]`, `["*", a, b]`, `["scale", c, e]`, `["sq", e]`.
//! Floats are written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::expr::Expr;
use super::instance::{Instance, LinearRow, NonlinearConstraint};
use super::ModelError;

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, ModelError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    let text = instance_to_string(instance);
    let mut file = fs::File::create(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(text.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

/// Parses JSON text into a JSON value, reporting line and column on error.
pub fn parse_json(text: &str) -> Result<Value, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let root = parse_json(text)?;
    instance_from_json(&root)
}

pub fn instance_from_json(root: &Value) -> Result<Instance, ModelError> {
    let obj = root
        .as_object()
        .ok_or_else(|| ModelError::schema("<root>", "expected a JSON object"))?;

    let name = match obj.get("name") {
        None => String::new(),
        Some(v) => v.as_str().ok_or_else(|| ModelError::schema("name", "expected a string"))?.to_string(),
    };
    let num_vars = require(obj, "num_vars")?
        .as_u64()
        .ok_or_else(|| ModelError::schema("num_vars", "expected a nonnegative integer"))? as usize;
    let objective = float_array(require(obj, "objective")?, "objective")?;
    let lower = bound_array(require(obj, "lower")?, "lower")?;
    let upper = bound_array(require(obj, "upper")?, "upper")?;

    let mut rows = Vec::new();
    for (i, row) in require(obj, "rows")?
        .as_array()
        .ok_or_else(|| ModelError::schema("rows", "expected an array"))?
        .iter()
        .enumerate()
    {
        let field = format!("rows[{i}]");
        let r = row.as_object().ok_or_else(|| ModelError::schema(&field, "expected an object"))?;
        let coefs_v = r
            .get("coefs")
            .ok_or_else(|| ModelError::schema(format!("{field}.coefs"), "missing required field"))?;
        let mut coefs = Vec::new();
        for pair in coefs_v
            .as_array()
            .ok_or_else(|| ModelError::schema(format!("{field}.coefs"), "expected an array"))?
        {
            let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                ModelError::schema(format!("{field}.coefs"), "expected [index, coefficient] pairs")
            })?;
            let j = p[0]
                .as_u64()
                .ok_or_else(|| ModelError::schema(format!("{field}.coefs"), "index must be a nonnegative integer"))?;
            let a = p[1]
                .as_f64()
                .ok_or_else(|| ModelError::schema(format!("{field}.coefs"), "coefficient must be a number"))?;
            coefs.push((j as usize, a));
        }
        let rhs = r
            .get("rhs")
            .ok_or_else(|| ModelError::schema(format!("{field}.rhs"), "missing required field"))?
            .as_f64()
            .ok_or_else(|| ModelError::schema(format!("{field}.rhs"), "expected a number"))?;
        let sense = match r.get("sense") {
            None => ">=",
            Some(s) => s.as_str().ok_or_else(|| ModelError::schema(format!("{field}.sense"), "expected a string"))?,
        };
        let ge = LinearRow::new(coefs, rhs);
        match sense {
            ">=" => rows.push(ge),
            "<=" => rows.push(ge.negated()),
            "=" | "==" => {
                rows.push(ge.negated());
                rows.push(ge);
            }
            other => {
                return Err(ModelError::schema(format!("{field}.sense"), format!("unknown sense `{other}`")));
            }
        }
    }

    let mut nonlinear = Vec::new();
    if let Some(nl) = obj.get("nonlinear") {
        for (k, con) in nl
            .as_array()
            .ok_or_else(|| ModelError::schema("nonlinear", "expected an array"))?
            .iter()
            .enumerate()
        {
            let field = format!("nonlinear[{k}]");
            let c = con.as_object().ok_or_else(|| ModelError::schema(&field, "expected an object"))?;
            let expr_v = c
                .get("expr")
                .ok_or_else(|| ModelError::schema(format!("{field}.expr"), "missing required field"))?;
            let expr = expr_from_json(expr_v).map_err(|e| e.in_field(&format!("{field}.expr")))?;
            let sense = match c.get("sense") {
                None => "<=0",
                Some(s) => s.as_str().ok_or_else(|| ModelError::schema(format!("{field}.sense"), "expected a string"))?,
            };
            match sense {
                "<=0" => nonlinear.push(expr),
                ">=0" => nonlinear.push(Expr::scale(-1.0, expr)),
                "=0" => {
                    nonlinear.push(expr.clone());
                    nonlinear.push(Expr::scale(-1.0, expr));
                }
                other => {
                    return Err(ModelError::schema(format!("{field}.sense"), format!("unknown sense `{other}`")));
                }
            }
        }
    }
    let nonlinear = nonlinear
        .into_iter()
        .enumerate()
        .map(|(k, e)| NonlinearConstraint::new(e, k))
        .collect();

    let mut integers = Vec::new();
    if let Some(iv) = obj.get("integers") {
        for v in iv.as_array().ok_or_else(|| ModelError::schema("integers", "expected an array"))? {
            integers.push(
                v.as_u64()
                    .ok_or_else(|| ModelError::schema("integers", "expected nonnegative integers"))? as usize,
            );
        }
    }
    integers.sort_unstable();
    integers.dedup();

    let mut instance = Instance { name, num_vars, objective, rows, nonlinear, lower, upper, integers };
    instance.validate()?;
    if let Some(fv) = obj.get("objective_expr") {
        let f = expr_from_json(fv).map_err(|e| e.in_field("objective_expr"))?;
        if let Some(j) = f.max_var_index() {
            if j >= num_vars {
                return Err(ModelError::schema("objective_expr", format!("references variable {j} >= {num_vars}")));
            }
        }
        // A purely affine objective expression folds into the linear part.
        match f.to_affine() {
            Some(lin) => {
                for (j, c) in lin.terms {
                    instance.objective[j] += c;
                }
            }
            None => instance = instance.with_objective_expr(f),
        }
        instance.validate()?;
    }
    Ok(instance)
}

pub(crate) fn require<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a Value, ModelError> {
    obj.get(field).ok_or_else(|| ModelError::schema(field, "missing required field"))
}

pub(crate) fn float_array(v: &Value, field: &str) -> Result<Vec<f64>, ModelError> {
    v.as_array()
        .ok_or_else(|| ModelError::schema(field, "expected an array of numbers"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| ModelError::schema(field, "expected a number")))
        .collect()
}

pub(crate) fn bound_array(v: &Value, field: &str) -> Result<Vec<f64>, ModelError> {
    v.as_array()
        .ok_or_else(|| ModelError::schema(field, "expected an array"))?
        .iter()
        .map(|x| match x {
            Value::Number(n) => n.as_f64().ok_or_else(|| ModelError::schema(field, "bad number")),
            Value::String(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(ModelError::schema(field, format!("unknown bound `{other}`"))),
            },
            _ => Err(ModelError::schema(field, "expected a number, \"inf\" or \"-inf\"")),
        })
        .collect()
}

pub fn expr_from_json(v: &Value) -> Result<Expr, ModelError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(Expr::Const)
            .ok_or_else(|| ModelError::schema("expr", "bad number")),
        Value::String(s) => parse_var(s)
            .map(Expr::Var)
            .ok_or_else(|| ModelError::schema("expr", format!("expected a variable like \"x0\", got `{s}`"))),
        Value::Array(items) => {
            let op = items
                .first()
                .and_then(Value::as_str)
                .ok_or_else(|| ModelError::schema("expr", "array must start with an operator string"))?;
            let args = &items[1..];
            let sub = |i: usize| expr_from_json(&args[i]);
            let arity = |k: usize| -> Result<(), ModelError> {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(ModelError::schema("expr", format!("operator `{op}` expects {k} argument(s), got {}", args.len())))
                }
            };
            match op {
                "+" => Ok(Expr::Sum(args.iter().map(expr_from_json).collect::<Result<_, _>>()?)),
                "-" if args.len() == 1 => Ok(Expr::scale(-1.0, sub(0)?)),
                "-" => {
                    arity(2)?;
                    Ok(Expr::Sum(vec![sub(0)?, Expr::scale(-1.0, sub(1)?)]))
                }
                "*" => {
                    arity(2)?;
                    Ok(Expr::product(sub(0)?, sub(1)?))
                }
                "scale" => {
                    arity(2)?;
                    let c = args[0]
                        .as_f64()
                        .ok_or_else(|| ModelError::schema("expr", "scale factor must be a number"))?;
                    Ok(Expr::scale(c, sub(1)?))
                }
                "sq" => {
                    arity(1)?;
                    Ok(Expr::square(sub(0)?))
                }
                other => Err(ModelError::schema("expr", format!("unknown operator `{other}`"))),
            }
        }
        _ => Err(ModelError::schema("expr", "expected a number, variable string or operator array")),
    }
}

fn parse_var(s: &str) -> Option<usize> {
    s.strip_prefix('x')?.parse().ok()
}

pub fn expr_to_json(e: &Expr) -> Value {
    match e {
        Expr::Const(c) => json!(c),
        Expr::Var(j) => Value::String(format!("x{j}")),
        Expr::Sum(terms) => {
            let mut arr = vec![Value::String("+".into())];
            arr.extend(terms.iter().map(expr_to_json));
            Value::Array(arr)
        }
        Expr::Scale(c, inner) => json!(["scale", c, expr_to_json(inner)]),
        Expr::Product(a, b) => json!(["*", expr_to_json(a), expr_to_json(b)]),
        Expr::Square(inner) => json!(["sq", expr_to_json(inner)]),
    }
}

pub(crate) fn bound_to_json(v: f64) -> Value {
    if v == f64::INFINITY {
        Value::String("inf".into())
    } else if v == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        json!(v)
    }
}

pub fn instance_to_json(inst: &Instance) -> Value {
    json!({
        "name": inst.name,
        "num_vars": inst.num_vars,
        "objective": inst.objective,
        "rows": inst.rows.iter().map(|r| json!({
            "coefs": r.coefs.iter().map(|&(j, a)| json!([j, a])).collect::<Vec<_>>(),
            "rhs": r.rhs,
            "sense": ">=",
        })).collect::<Vec<_>>(),
        "nonlinear": inst.nonlinear.iter().map(|g| json!({
            "expr": expr_to_json(&g.expr),
            "sense": "<=0",
        })).collect::<Vec<_>>(),
        "lower": inst.lower.iter().map(|&v| bound_to_json(v)).collect::<Vec<_>>(),
        "upper": inst.upper.iter().map(|&v| bound_to_json(v)).collect::<Vec<_>>(),
        "integers": inst.integers,
    })
}

pub fn instance_to_string(inst: &Instance) -> String {
    to_string_g17(&instance_to_json(inst))
}

/// Serializes a JSON value writing every float with 17 significant digits.
pub fn to_string_g17(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter);
    serde::Serialize::serialize(value, &mut ser).expect("serializing a JSON value cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }
}

/// `%.17g`-style formatting.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if (-5..17).contains(&exp) {
        let s = if exp >= 0 {
            let split = exp as usize + 1;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        let s = s.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{s}")
    } else {
        let frac = digits[1..].trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{}e{exp}", &digits[..1])
        } else {
            format!("{sign}{}.{frac}e{exp}", &digits[..1])
        }
    }
}
