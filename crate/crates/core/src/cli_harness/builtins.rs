use crate::algorithms::ProblemFile;

const BUILTINS: &[(&str, &str)] = &[
    (
        "rm-linear",
        r#"{"schema_version": 1, "id": "rm-linear", "type": "rm",
            "M": {"name": "linear", "k": 2, "c": 1}, "b": 0, "A": 2, "B": 1, "x0": 1,
            "noise": {"kind": "gaussian", "sigma": 1},
            "schedule": {"name": "harmonic", "shift": 1}}"#,
    ),
    (
        "sgd-quadratic",
        r#"{"schema_version": 1, "id": "sgd-quadratic", "type": "sgd",
            "grad": {"name": "linear", "k": 1, "c": -1.5}, "x0": 4,
            "noise": {"kind": "gaussian", "sigma": 1},
            "schedule": {"name": "harmonic", "shift": 1}}"#,
    ),
    (
        "kw-quadratic",
        r#"{"schema_version": 1, "id": "kw-quadratic", "type": "kw",
            "M": {"name": "neg_quadratic", "scale": 1, "center": 1}, "x0": -2,
            "noise": {"kind": "gaussian", "sigma": 0.5},
            "schedule": {"name": "harmonic", "shift": 1},
            "c_schedule": {"name": "power", "p": 0.3333333333333333}}"#,
    ),
    (
        "banach-linear",
        r#"{"schema_version": 1, "id": "banach-linear", "type": "banach",
            "g": {"name": "linear", "k": 0.5, "c": 1}, "gamma_contr": 0.5, "fixed_point": 2,
            "x0": -3, "schedule": {"name": "harmonic", "shift": 1}}"#,
    ),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_problem(name: &str) -> Option<ProblemFile> {
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ProblemFile::from_json(text).expect("builtin problems parse"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for name in builtin_names() {
            let p = builtin_problem(name).unwrap();
            assert_eq!(p.spec_id(), name);
            p.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(builtin_problem("nope").is_none());
    }
}
