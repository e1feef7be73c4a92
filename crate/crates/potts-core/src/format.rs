//! Stable numeric formatting for CSV artifacts.

/// Format with 12 significant digits in scientific notation. Stable across
/// runs and platforms so CSV bodies are byte-diffable.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        // normalize -0.0
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}
