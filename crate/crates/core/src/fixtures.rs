//! Bundled reference models, multi-time Hamiltonians and the expression
//! corpus used by the differentiation checks.

use std::collections::BTreeMap;

use crate::lagrangian::LagrangianModel;

pub const MODEL_NAMES: [&str; 5] = ["R", "S1", "S2", "G1", "G2"];

/// `(name, coordinates, lagrangian)`.
pub const MODELS: [(&str, &[&str], &str); 5] = [
    ("R", &["q1", "q2"], "(q1_dot^2 + q2_dot^2)/2 - (q1^2 + q2^2)/2"),
    ("S1", &["q1", "q2"], "q1_dot*q2 - (q1^2 + q2^2)/2"),
    ("S2", &["q1", "q2", "q3"], "q1_dot*q2 - (q1^2 + q2^2)/2"),
    ("G1", &["q1", "q2"], "q1_dot^2/2"),
    ("G2", &["q1", "q2"], "(q1_dot - q2)^2/2"),
];

pub fn try_model(name: &str) -> Option<LagrangianModel> {
    let (n, coords, l) = MODELS.iter().find(|(n, _, _)| *n == name)?;
    Some(LagrangianModel::new(*n, coords, l, BTreeMap::new()).expect("bundled fixture is valid"))
}

/// Panics on an unknown name.
pub fn model(name: &str) -> LagrangianModel {
    try_model(name).unwrap_or_else(|| panic!("no fixture named `{name}`"))
}

/// Multi-time Hamiltonians over one canonical pair `(q, p_q)` and times
/// `(t, tau1)`: `(name, [H_0, H_1], integrable)`.
pub const MULTITIME: [(&str, [&str; 2], bool); 2] = [
    ("commuting", ["p_q^2/2", "p_q"], true),
    ("noncommuting", ["p_q^2/2", "q"], false),
];

/// Expressions over `t, q1, q2, q3` that are smooth on `[-2, 2]^4`.
pub const EXPRESSION_CORPUS: [&str; 56] = [
    "q1",
    "q1^2",
    "q1^3 - 2*q1",
    "q1*q2",
    "q1*q2*q3",
    "q1^2*q2 - q2^3/3",
    "(q1 + q2)^2",
    "(q1 - q2)^3",
    "(q1 + 2*q2 - q3)^4",
    "q1^5 - q2^4 + q3^3",
    "0.5*(q1^2 + q2^2)",
    "3/4*q1*q2 - 1/3*q3",
    "q1_dot*q2 - (q1^2 + q2^2)/2",
    "(q1_dot - q2)^2/2",
    "q1_dot^2/2 + q2_dot^2/2 - q1*q2",
    "t*q1 + t^2*q2",
    "sin(q1)",
    "cos(q2)",
    "sin(q1)*cos(q2)",
    "sin(q1*q2)",
    "cos(q1 + q2 + q3)",
    "sin(q1)^2 + cos(q1)^2",
    "sin(q1)*exp(q2)",
    "exp(q1)",
    "exp(-q1^2)",
    "exp(q1*q2 - q3)",
    "exp(sin(q1))",
    "sin(exp(q2)/3)",
    "log(q1^2 + 1)",
    "log(1 + q1^2 + q2^2)",
    "log(exp(q1) + 1)",
    "q1*log(q2^2 + 2)",
    "exp(log(q1^2 + 3))",
    "1/(1 + q1^2)",
    "q1/(1 + q2^2)",
    "(q1 + q2)/(3 + q3^2)",
    "1/(q1^2 + q2^2 + 1)^2",
    "(q1^2 - 1)/(q1^2 + 1)",
    "q1*q2/(q1^2 + q2^2 + 1)",
    "sin(q1)/(2 + cos(q2))",
    "exp(q1)/(1 + exp(q1))",
    "(1 + q1^2)^-2",
    "(2 + sin(q1))^-1",
    "-q1^2*q2",
    "-(q1 - q3)^2",
    "-sin(-q2)",
    "q1^2*sin(q2) - q2^2*cos(q1)",
    "cos(q1)^3 - sin(q2)^2*q3",
    "t*sin(q1) + cos(t*q2)",
    "exp(-t)*q1^2",
    "log(2 + sin(q1*q2*q3))",
    "(q1*q2 - q3)^2/(1 + q3^2)",
    "q1_dot*q1 + q2_dot^2*q2",
    "(q1_dot + q2_dot)^2/2",
    "sin(q1_dot)*q2",
    "2^3*q1 - 8*q1 + q2",
];
