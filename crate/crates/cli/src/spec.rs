//! Parsers for the command-line mini-grammars.
//!
//! Functions:
//!   `huber`                           (`x²` near 0, `|x| − ¼` beyond ½; alias `paper-example`)
//!   `quadratic:A=2,0|0,8;b=0,0;c=0`   (`b`, `c` default to zero)
//!   `quadratic:diag=1,4`
//!   `norm:lambda=1;dim=2`             (`dim` defaults to the start point's)
//!   `maxaffine:a=1,0|-1,0;b=0,0`      (`b` defaults to zero)
//!
//! Schedules: `constant:0.5`, `geometric:0.5,0.5` (`t_i = 0.5·0.5^i`),
//! `harmonic` (`t_i = 1/(i+1)`), `explicit:0.5,0.25,…`.

use std::collections::BTreeMap;

use selfcontract::prox::{ConvexFunction, MaxAffine, NormScaled, Huber, ProxSchedule, Quadratic};
use selfcontract::Point;

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| {
            let x: f64 = v.trim().parse().map_err(|_| format!("{what}: not a number: {:?}", v.trim()))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{what}: non-finite value {:?}", v.trim()))
            }
        })
        .collect()
}

fn matrix(s: &str, what: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split('|').map(|row| numbers(row, what)).collect()
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    Point::new(numbers(s, "point")?).map_err(|e| e.to_string())
}

fn fields(body: &str) -> Result<BTreeMap<&str, &str>, String> {
    let mut out = BTreeMap::new();
    for part in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        if out.insert(k.trim(), v.trim()).is_some() {
            return Err(format!("duplicate key {:?}", k.trim()));
        }
    }
    Ok(out)
}

fn reject_unknown(map: &BTreeMap<&str, &str>, allowed: &[&str]) -> Result<(), String> {
    match map.keys().find(|k| !allowed.contains(k)) {
        Some(k) => Err(format!("unknown key {k:?}; expected one of {allowed:?}")),
        None => Ok(()),
    }
}

pub fn parse_function(spec: &str, default_dim: Option<usize>) -> Result<Box<dyn ConvexFunction>, String> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let map = fields(body)?;
    let f: Box<dyn ConvexFunction> = match kind.trim() {
        "huber" | "paper-example" => {
            reject_unknown(&map, &[])?;
            Box::new(Huber)
        }
        "quadratic" => {
            reject_unknown(&map, &["A", "diag", "b", "c"])?;
            let a = match (map.get("A"), map.get("diag")) {
                (Some(a), None) => matrix(a, "A")?,
                (None, Some(d)) => {
                    let d = numbers(d, "diag")?;
                    (0..d.len()).map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect()
                }
                _ => return Err("quadratic needs exactly one of A= or diag=".into()),
            };
            let b = match map.get("b") {
                Some(b) => numbers(b, "b")?,
                None => vec![0.0; a.len()],
            };
            let c = match map.get("c") {
                Some(c) => numbers(c, "c")?.first().copied().unwrap_or(0.0),
                None => 0.0,
            };
            Box::new(Quadratic::new(a, b, c).map_err(|e| e.to_string())?)
        }
        "norm" => {
            reject_unknown(&map, &["lambda", "dim"])?;
            let lambda = map.get("lambda").map(|s| numbers(s, "lambda")).transpose()?.map_or(1.0, |v| v[0]);
            let dim = match map.get("dim") {
                Some(d) => d.parse::<usize>().map_err(|_| format!("dim: not an integer: {d:?}"))?,
                None => default_dim.ok_or("norm needs dim=")?,
            };
            Box::new(NormScaled::new(lambda, dim).map_err(|e| e.to_string())?)
        }
        "maxaffine" => {
            reject_unknown(&map, &["a", "b"])?;
            let a = matrix(map.get("a").ok_or("maxaffine needs a=")?, "a")?;
            let b = match map.get("b") {
                Some(b) => numbers(b, "b")?,
                None => vec![0.0; a.len()],
            };
            Box::new(MaxAffine::new(a, b).map_err(|e| e.to_string())?)
        }
        other => return Err(format!("unknown function kind {other:?}")),
    };
    Ok(f)
}

pub fn parse_schedule(spec: &str) -> Result<ProxSchedule, String> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    match kind.trim() {
        "constant" => match numbers(body, "constant")?.as_slice() {
            [t] => Ok(ProxSchedule::Constant(*t)),
            _ => Err("constant takes one step size".into()),
        },
        "geometric" => match numbers(body, "geometric")?.as_slice() {
            [initial, ratio] => Ok(ProxSchedule::Geometric { initial: *initial, ratio: *ratio }),
            _ => Err("geometric takes initial,ratio".into()),
        },
        "harmonic" if body.trim().is_empty() => Ok(ProxSchedule::Harmonic),
        "explicit" => Ok(ProxSchedule::Explicit(numbers(body, "explicit")?)),
        other => Err(format!("unknown schedule {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functions() {
        let f = parse_function("quadratic:A=2,0|0,8;b=0,0;c=0", None).unwrap();
        assert_eq!(f.value(&[1.0, 1.0]), 5.0);
        let f = parse_function("quadratic:A=2", None).unwrap();
        assert_eq!(f.value(&[3.0]), 9.0);
        let f = parse_function("quadratic:diag=1,4", None).unwrap();
        assert_eq!(f.value(&[1.0, 1.0]), 2.5);
        let f = parse_function("huber", None).unwrap();
        assert_eq!(f.value(&[2.0]), 1.75);
        assert_eq!(parse_function("paper-example", None).unwrap().value(&[0.5]), 0.25);
        let f = parse_function("norm:lambda=2", Some(3)).unwrap();
        assert_eq!(f.value(&[0.0, 3.0, 4.0]), 10.0);
        let f = parse_function("maxaffine:a=1,0|-1,0;b=0,0", None).unwrap();
        assert_eq!(f.value(&[-2.0, 7.0]), 2.0);
    }

    #[test]
    fn bad_functions() {
        for bad in [
            "",
            "cubic",
            "quadratic",
            "quadratic:A=1,2|3",
            "quadratic:A=1,2|3,4",
            "quadratic:A=-1",
            "quadratic:A=1;A=2",
            "quadratic:A=1;q=2",
            "quadratic:A=x",
            "norm:lambda=1",
            "norm:lambda=-1;dim=2",
            "maxaffine:b=1",
            "maxaffine:a=1|1,2",
            "huber:x=1",
        ] {
            assert!(parse_function(bad, None).is_err(), "{bad}");
        }
    }

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("constant:0.5").unwrap(), ProxSchedule::Constant(0.5));
        assert_eq!(
            parse_schedule("geometric:0.5,0.5").unwrap(),
            ProxSchedule::Geometric { initial: 0.5, ratio: 0.5 }
        );
        assert_eq!(parse_schedule("harmonic").unwrap(), ProxSchedule::Harmonic);
        assert_eq!(parse_schedule("explicit:0.5,0.25").unwrap(), ProxSchedule::Explicit(vec![0.5, 0.25]));
        for bad in ["", "constant", "constant:1,2", "geometric:1", "harmonic:2", "explicit:", "linear:1"] {
            assert!(parse_schedule(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("1, -2.5").unwrap().coords(), &[1.0, -2.5]);
        assert!(parse_point("").is_err());
        assert!(parse_point("1,inf").is_err());
    }
}
