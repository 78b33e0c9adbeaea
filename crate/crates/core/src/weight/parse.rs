//! Recursive-descent parser for the weight mini-language.
//!
//! ```text
//! w := "power:" num
//!    | "powerlog:" num "," num "," num
//!    | "expdamped:" num "," num
//!    | "trunc(" w "," num ")"
//!    | "scale(" w "," num ")"
//!    | ("min" | "max" | "sum") "(" w "," w ")"
//!    | "table:" path
//! ```
//!
//! Whitespace between tokens is ignored. A table path runs until the next
//! `,`, `)` or whitespace.

use std::sync::Arc;

use super::{Table, WeightFunction};
use crate::error::{Error, Result};

pub fn parse_weight(src: &str) -> Result<WeightFunction> {
    let mut p = Parser { src, pos: 0 };
    let w = p.weight()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input after weight expression"));
    }
    w.validate().map_err(|e| Error::Parse {
        pos: 0,
        msg: e.to_string(),
    })?;
    Ok(w)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a number"));
        }
        let text = &self.rest()[..len];
        let x: f64 = text.parse().map_err(|_| self.err(format!("malformed number `{text}`")))?;
        self.pos += len;
        Ok(x)
    }

    fn path(&mut self) -> Result<String> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| c == ',' || c == ')' || c.is_whitespace())
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a table path"));
        }
        let p = self.rest()[..len].to_string();
        self.pos += len;
        Ok(p)
    }

    fn weight(&mut self) -> Result<WeightFunction> {
        if self.eat("powerlog:") {
            let a = self.number()?;
            self.expect(",")?;
            let b1 = self.number()?;
            self.expect(",")?;
            let b2 = self.number()?;
            return Ok(WeightFunction::PowerLog { a, b1, b2 });
        }
        if self.eat("power:") {
            return Ok(WeightFunction::Power { a: self.number()? });
        }
        if self.eat("expdamped:") {
            let a = self.number()?;
            self.expect(",")?;
            let kappa = self.number()?;
            return Ok(WeightFunction::ExpDamped { a, kappa });
        }
        if self.eat("table:") {
            let start = self.pos;
            let path = self.path()?;
            let table = Table::from_csv(&path).map_err(|e| Error::Parse {
                pos: start,
                msg: e.to_string(),
            })?;
            return Ok(WeightFunction::Tabulated(Arc::new(table.with_source(path))));
        }
        for (kw, kind) in [("trunc(", 0), ("scale(", 1)] {
            if self.eat(kw) {
                let inner = Box::new(self.weight()?);
                self.expect(",")?;
                let c = self.number()?;
                self.expect(")")?;
                return Ok(if kind == 0 {
                    WeightFunction::Truncated { inner, cutoff: c }
                } else {
                    WeightFunction::Scaled { inner, factor: c }
                });
            }
        }
        for (kw, kind) in [("min(", 0), ("max(", 1), ("sum(", 2)] {
            if self.eat(kw) {
                let a = Box::new(self.weight()?);
                self.expect(",")?;
                let b = Box::new(self.weight()?);
                self.expect(")")?;
                return Ok(match kind {
                    0 => WeightFunction::Min(a, b),
                    1 => WeightFunction::Max(a, b),
                    _ => WeightFunction::Sum(a, b),
                });
            }
        }
        Err(self.err("expected one of power:, powerlog:, expdamped:, trunc(, scale(, min(, max(, sum(, table:"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn parses_nested() {
        let w = parse_weight("min( power:0.5 , trunc(powerlog:1,-1,0.5, 2))").unwrap();
        assert_eq!(
            w,
            WeightFunction::min(
                WeightFunction::power(0.5),
                WeightFunction::power_log(1.0, -1.0, 0.5).truncated(2.0)
            )
        );
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "power:",
            "power:abc",
            "power:1 x",
            "expdamped:1,0",
            "expdamped:1,-2",
            "trunc(power:1,-1)",
            "sum(power:1)",
            "cube:1",
            "power:inf",
            "table:/nonexistent/file.csv",
        ] {
            assert!(parse_weight(bad).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn error_position_points_at_problem() {
        match parse_weight("max(power:1,oops)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn table_file_roundtrip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t,v\n0.5,1\n1,2\n2,3").unwrap();
        let path = f.path().display().to_string();
        let w = parse_weight(&format!("max(table:{path},power:0)")).unwrap();
        assert_eq!(w.value(1.0), 2.0);
        assert_eq!(w.to_string(), format!("max(table:{path},power:0.0)"));
        let again = parse_weight(&w.to_string()).unwrap();
        assert_eq!(again, w);
    }

    fn arb_num() -> impl Strategy<Value = f64> {
        prop_oneof![(-8.0f64..8.0), (-300i32..300).prop_map(|e| 10f64.powi(e)), Just(0.0)]
    }

    fn arb_pos() -> impl Strategy<Value = f64> {
        prop_oneof![(1e-6f64..1e6), (-300i32..300).prop_map(|e| 10f64.powi(e))]
    }

    fn arb_weight() -> impl Strategy<Value = WeightFunction> {
        let leaf = prop_oneof![
            arb_num().prop_map(WeightFunction::power),
            (arb_num(), arb_num(), arb_num()).prop_map(|(a, b, c)| WeightFunction::power_log(a, b, c)),
            (arb_num(), arb_pos()).prop_map(|(a, k)| WeightFunction::exp_damped(a, k)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), arb_pos()).prop_map(|(w, c)| w.truncated(c)),
                (inner.clone(), arb_pos()).prop_map(|(w, c)| w.scaled(c)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| WeightFunction::sum(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| WeightFunction::max(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| WeightFunction::min(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(w in arb_weight()) {
            let text = w.to_string();
            let back = parse_weight(&text).unwrap();
            prop_assert_eq!(back, w);
        }
    }
}
