//! Z_m efficiency tables for a pure sinusoid and a multi-peaked profile.

use photon_score::lightcurve::template_efficiency;
use photon_score::power::zm_efficiency_table;
use photon_score::prelude::*;

fn main() -> photon_score::Result<()> {
    let sinusoid = LightCurveProfile::sinusoid(0.5, 1.0)?;
    // Mean squared amplitudes typical of a double-peaked profile.
    let coeffs = [0.35f64, 0.77, 0.43, 0.17, 0.26]
        .iter()
        .map(|g| Complex64::new(g.sqrt(), 0.0))
        .collect();
    let peaked = LightCurveProfile::new(coeffs, 0.1)?;

    for (name, source) in [("sinusoid", &sinusoid), ("double peak", &peaked)] {
        println!("{name}");
        for (m, pct) in zm_efficiency_table(source, 8)? {
            println!("  Z_{m}: {pct:6.2} %");
        }
        let matched = HarmonicTemplate::matched(source)?;
        println!(
            "  matched: {:.2} %",
            100.0 * template_efficiency(&matched, source)?
        );
    }
    Ok(())
}
