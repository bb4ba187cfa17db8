/// Server-to-agent numbers: at most two decimals, trailing zeros dropped.
pub fn format_coarse(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    let mut s = format!("{r:.2}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Agent-to-server numbers: shortest representation that parses back to the
/// identical `f64`.
pub fn format_exact(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_keeps_two_decimals() {
        assert_eq!(format_coarse(12.3456), "12.35");
        assert_eq!(format_coarse(8000.0), "8000");
        assert_eq!(format_coarse(0.5), "0.5");
        assert_eq!(format_coarse(-0.001), "0");
        assert_eq!(format_coarse(-30.5), "-30.5");
    }

    #[test]
    fn exact_round_trips() {
        for x in [0.1, -30.5, 1.0 / 3.0, 1e-9, 123456.789] {
            assert_eq!(format_exact(x).parse::<f64>().unwrap(), x);
        }
    }
}
