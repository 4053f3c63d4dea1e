use std::f64::consts::TAU;

use ecslab::states::{pn_coefficients_at, DeformedModel, MassModel};
use ecslab::verify::*;
use ecslab::{Complex64, EllipticContext, Error};
use serde_json::{json, Value};

use crate::{Flags, TableKind};

pub struct Table {
    pub kind: TableKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(kind: TableKind, columns: &[&str]) -> Self {
        Self {
            kind,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

fn beta_of(ctx: &EllipticContext) -> Value {
    if ctx.is_trigonometric() {
        Value::Null
    } else {
        json!(ctx.beta())
    }
}

fn check_lambda(given: Option<Complex64>, expected: f64, rule: &str) -> Result<(), Error> {
    match given {
        Some(l) if (l - expected).norm() > 1e-12 * expected.abs().max(1.0) => Err(Error::Constraint(format!(
            "{rule} requires lambda = {expected}, got {l}"
        ))),
        _ => Ok(()),
    }
}

pub fn build(kind: TableKind, flags: &Flags) -> Result<Table, Error> {
    match kind {
        TableKind::Eigenvalues => eigenvalues(flags),
        TableKind::Constants => constants(flags),
        TableKind::Coefficients => coefficients(flags),
    }
}

fn eigenvalues(flags: &Flags) -> Result<Table, Error> {
    let mut t = Table::new(
        TableKind::Eigenvalues,
        &["state", "N", "Ntilde", "lambda", "beta", "q", "n", "E", "E_minus_n2"],
    );
    let ns = if flags.n.is_empty() { vec![2] } else { flags.n.clone() };
    let nts = if flags.n_tilde.is_empty() { vec![1] } else { flags.n_tilde.clone() };
    for ctx in flags.contexts()? {
        for &n in &ns {
            for &nt in &nts {
                match flags.labels {
                    Some((lo, hi)) => {
                        if n < 2 {
                            return Err(Error::Constraint(format!("labelled eigenvalues need N >= 2, got {n}")));
                        }
                        let lambda = nt as f64 / (n - 1) as f64;
                        check_lambda(flags.lambda, lambda, "lambda = Ntilde/(N-1)")?;
                        for label in lo..=hi {
                            let e = energy_en_cor3(n, nt, label, &ctx)?;
                            t.rows.push(vec![
                                json!("psi_n"),
                                json!(n),
                                json!(nt),
                                json!(lambda),
                                beta_of(&ctx),
                                json!(ctx.q()),
                                json!(label),
                                json!(e),
                                json!(e - (label * label) as f64),
                            ]);
                        }
                    }
                    None => {
                        if n == 0 {
                            return Err(Error::Constraint("N must be positive".into()));
                        }
                        let lambda = nt as f64 / n as f64;
                        check_lambda(flags.lambda, lambda, "lambda = Ntilde/N")?;
                        let e = energy_e0_cor2(n, nt, &ctx)?;
                        t.rows.push(vec![
                            json!("psi_0"),
                            json!(n),
                            json!(nt),
                            json!(lambda),
                            beta_of(&ctx),
                            json!(ctx.q()),
                            Value::Null,
                            json!(e),
                            json!(e),
                        ]);
                    }
                }
            }
        }
    }
    Ok(t)
}

fn constants(flags: &Flags) -> Result<Table, Error> {
    let mut t = Table::new(
        TableKind::Constants,
        &[
            "quantity", "N", "Ntilde", "M", "Mtilde", "calN", "lambda_re", "lambda_im", "beta", "q", "re", "im",
        ],
    );
    let lambda = flags.lambda.unwrap_or(Complex64::new(1.0, 0.0));
    let shift = (flags.b0.is_some() || flags.b1.is_some()).then(|| ShiftSpec {
        b0: flags.b0.unwrap_or(0.0),
        b1: flags.b1.unwrap_or(0.0),
    });
    let deformed = !flags.n.is_empty() || !flags.n_tilde.is_empty() || flags.m.is_some() || flags.m_tilde.is_some();
    let masses = match (&flags.masses, flags.cal_n) {
        (Some(m), Some(n)) if m.len() != n => {
            return Err(Error::Constraint(format!("{} masses given for calN = {n}", m.len())))
        }
        (Some(m), _) => Some(m.clone()),
        (None, Some(_)) => return Err(Error::Constraint("--calN needs --masses for the constants table".into())),
        (None, None) => None,
    };
    if !deformed && masses.is_none() {
        return Err(Error::Constraint("give --N/--Ntilde/--M/--Mtilde or --masses".into()));
    }
    for ctx in flags.contexts()? {
        let mut push = |q: &str, dims: [Value; 5], z: Complex64| {
            let [a, b, c, d, e] = dims;
            t.rows.push(vec![
                json!(q),
                a,
                b,
                c,
                d,
                e,
                json!(lambda.re),
                json!(lambda.im),
                beta_of(&ctx),
                json!(ctx.q()),
                // `+ 0.0` turns a signed zero into a plain one.
                json!(z.re + 0.0),
                json!(z.im + 0.0),
            ]);
        };
        if deformed {
            let one = |v: &[usize], name: &str| match v {
                [] => Ok(0),
                [x] => Ok(*x),
                _ => Err(Error::Constraint(format!("--{name} takes a single value here"))),
            };
            let model = DeformedModel::new(
                one(&flags.n, "N")?,
                one(&flags.n_tilde, "Ntilde")?,
                flags.m.unwrap_or(0),
                flags.m_tilde.unwrap_or(0),
                lambda,
            )?;
            let dims = || [json!(model.n), json!(model.n_tilde), json!(model.m), json!(model.m_tilde), Value::Null];
            let c = constant_c(&model, &ctx);
            push("C", dims(), c);
            push("beta_coefficient", dims(), model.beta_coefficient());
            if model.is_balanced() {
                push("C_balanced", dims(), reduced_c(&model, &ctx));
            }
            push("C_standard", dims(), standard_c(&model, &ctx));
            if let Some(s) = shift {
                push("C_shifted", dims(), shifted_e0(&model.embedding(), &ctx, s));
            }
            if let Some(v) = flags.v {
                push("C_dressed", dims(), c + dressing_shift_c(&model, v));
            }
        }
        if let Some(m) = &masses {
            let model = MassModel::new(lambda, m.clone())?;
            let dims = || [Value::Null, Value::Null, Value::Null, Value::Null, json!(model.particle_count())];
            let e0 = energy_e0_prop1(&model, &ctx);
            push("E0", dims(), e0);
            push("E0_pair_sum", dims(), energy_e0_double_sum(&model, &ctx));
            if model.power_sum(1).norm() <= 1e-12 * model.masses().iter().map(|x| x.norm()).fold(0.0, f64::max) {
                push("E0_zero_total_mass", dims(), reduced_e0(&model, &ctx));
            }
            push("E0_standard", dims(), standard_e0(&model, &ctx));
            if let Some(s) = shift {
                push("E0_shifted", dims(), shifted_e0(&model, &ctx, s));
            }
            if let Some(v) = flags.v {
                push("E0_dressed", dims(), e0 + dressing_shift_e0(&model, v));
            }
        }
    }
    Ok(t)
}

fn coefficients(flags: &Flags) -> Result<Table, Error> {
    let mut t = Table::new(
        TableKind::Coefficients,
        &[
            "N", "Ntilde", "lambda_re", "lambda_im", "beta", "q", "n", "P_re", "P_im", "P_abs", "scale", "radius",
            "nodes",
        ],
    );
    let pick = |v: &[usize], default: usize, name: &str| match v {
        [] => Ok(default),
        [x] => Ok(*x),
        _ => Err(Error::Constraint(format!("--{name} takes a single value here"))),
    };
    let n = pick(&flags.n, 2, "N")?;
    let nt = pick(&flags.n_tilde, 1, "Ntilde")?;
    let lambda = match flags.lambda {
        Some(l) => l,
        None if n >= 2 => Complex64::new(nt as f64 / (n - 1) as f64, 0.0),
        None => return Err(Error::Constraint("give --lambda when N < 2".into())),
    };
    // Default positions: N + Ñ equally spaced points, decreasing.
    let total = n + nt;
    let spread: Vec<f64> = (0..total)
        .map(|k| TAU * ((total - k) as f64 - 0.5) / total as f64)
        .collect();
    let x = flags.x.clone().unwrap_or_else(|| spread[..n].to_vec());
    let xt = flags.xt.clone().unwrap_or_else(|| spread[n..].to_vec());
    if x.len() != n || xt.len() != nt {
        return Err(Error::Constraint(format!(
            "got {} x and {} xt positions for N = {n}, Ntilde = {nt}",
            x.len(),
            xt.len()
        )));
    }
    let (lo, hi) = flags.labels.unwrap_or((-2, 3));
    for ctx in flags.contexts()? {
        let p = pn_coefficients_at(&ctx, lambda, &x, &xt, lo..=hi, &flags.quad())?;
        for (label, value) in p.iter() {
            t.rows.push(vec![
                json!(n),
                json!(nt),
                json!(lambda.re),
                json!(lambda.im),
                beta_of(&ctx),
                json!(ctx.q()),
                json!(label),
                json!(value.re),
                json!(value.im),
                json!(value.norm()),
                json!(p.scale(label)),
                json!(p.radius),
                json!(p.nodes),
            ]);
        }
    }
    Ok(t)
}
