use num_complex::Complex64;

use super::{Symbol, SymbolError};

/// Parses `1.5`, `-2i`, `i`, `0.3-0.4i`, `1e-3+2e-1i`.
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let s = token.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(x) = s.parse::<f64>() {
        return Some(Complex64::new(x, 0.0));
    }
    let body = s.strip_suffix('i')?;
    // Split at the last sign that is not the leading sign and not an exponent sign.
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
            split = Some(idx);
            break;
        }
    }
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(idx) => {
            let re: f64 = body[..idx].parse().ok()?;
            Some(Complex64::new(re, imag(&body[idx..])?))
        }
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

fn err(token: &str, reason: impl Into<String>) -> SymbolError {
    SymbolError::Parse {
        token: token.to_string(),
        reason: reason.into(),
    }
}

fn parse_list(token: &str, body: &str) -> Result<Vec<Complex64>, SymbolError> {
    body.split(',')
        .map(|t| parse_complex(t).ok_or_else(|| err(token, format!("'{}' is not a number", t.trim()))))
        .collect()
}

fn parse_real(token: &str, body: &str) -> Result<f64, SymbolError> {
    let x: f64 = body
        .trim()
        .parse()
        .map_err(|_| err(token, format!("'{}' is not a real number", body.trim())))?;
    if !x.is_finite() {
        return Err(err(token, "value must be finite"));
    }
    Ok(x)
}

/// Splits `a;b` at the single top-level semicolon.
fn split_top_level(token: &str, body: &str) -> Result<(String, String), SymbolError> {
    let mut depth = 0i32;
    let mut at = None;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                if at.is_some() {
                    return Err(err(token, "compose takes exactly two symbols"));
                }
                at = Some(i);
            }
            _ => {}
        }
        if depth < 0 {
            return Err(err(token, "unbalanced parentheses"));
        }
    }
    if depth != 0 {
        return Err(err(token, "unbalanced parentheses"));
    }
    let i = at.ok_or_else(|| err(token, "compose needs '<outer>;<inner>'"))?;
    Ok((body[..i].to_string(), body[i + 1..].to_string()))
}

pub(super) fn parse_symbol(token: &str) -> Result<Symbol, SymbolError> {
    let s = token.trim();
    match s {
        "halfmap" => return Ok(Symbol::HalfMap),
        "zhalfmap" => return Ok(Symbol::ZHalfMap),
        "tangentmap" => return Ok(Symbol::TangentMap),
        "id" | "identity" => return Ok(Symbol::Dilation(1.0)),
        _ => {}
    }
    if let Some(inner) = s.strip_prefix("compose(").and_then(|r| r.strip_suffix(')')) {
        let (outer, inner) = split_top_level(s, inner)?;
        return Ok(Symbol::Compose(Box::new(parse_symbol(&outer)?), Box::new(parse_symbol(&inner)?)));
    }
    let (head, body) = s.split_once(':').ok_or_else(|| err(s, "unknown symbol"))?;
    match head {
        "dilate" => Ok(Symbol::Dilation(parse_real(s, body)?)),
        "rot" => Ok(Symbol::Rotation(parse_real(s, body)?)),
        "linfrac" => {
            let v = parse_list(s, body)?;
            let [a, b, c, d] = v[..] else {
                return Err(err(s, format!("linfrac needs 4 coefficients, got {}", v.len())));
            };
            Ok(Symbol::LinearFractional { a, b, c, d })
        }
        "poly" => {
            let v = parse_list(s, body)?;
            Ok(Symbol::Polynomial(v))
        }
        other => Err(err(s, format!("unknown symbol family '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = Complex64::new;
        assert_eq!(parse_complex("1.5"), Some(c(1.5, 0.0)));
        assert_eq!(parse_complex("-2i"), Some(c(0.0, -2.0)));
        assert_eq!(parse_complex("i"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("0.3-0.4i"), Some(c(0.3, -0.4)));
        assert_eq!(parse_complex("1e-3+2e-1i"), Some(c(1e-3, 0.2)));
        assert_eq!(parse_complex("-1-i"), Some(c(-1.0, -1.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn symbol_grammar() {
        assert_eq!(parse_symbol("dilate:0.5").unwrap(), Symbol::Dilation(0.5));
        assert_eq!(parse_symbol("halfmap").unwrap(), Symbol::HalfMap);
        let nested = parse_symbol("compose(compose(halfmap;zhalfmap);dilate:0.5)").unwrap();
        assert!(matches!(nested, Symbol::Compose(_, _)));
        for bad in ["dilate:x", "linfrac:1,2,3", "compose(halfmap)", "compose(a;b;c)", "blob", "poly:1,,2"] {
            assert!(parse_symbol(bad).is_err(), "{bad}");
        }
        let msg = parse_symbol("dilate:abc").unwrap_err().to_string();
        assert!(msg.contains("abc"));
    }
}
