//! Closed-form solutions of the stock systems, used as regression oracles.

/// Disk centre for `φ(t) = φ₀ + φ̇ t`, `θ̇` constant, starting at the origin:
/// `x = ρ (sin φ − sin φ₀)`, `y = ρ (cos φ₀ − cos φ)` with `ρ = R θ̇ / φ̇`.
pub fn rolling_disk_xy(t: f64, r: f64, theta_dot: f64, phi_dot: f64, phi0: f64) -> (f64, f64) {
    let rho = r * theta_dot / phi_dot;
    let phi = phi0 + phi_dot * t;
    (rho * (phi.sin() - phi0.sin()), rho * (phi0.cos() - phi.cos()))
}

/// Exact LC-circuit state `(q, p)` at time `t`.
///
/// With `u = q^{c₂}/c₂ + q^{c₁}/c₁` and current `i = q̇^ℓ`, the circuit is the
/// oscillator `ℓ i̇ = −u`, `u̇ = κ i` with `κ = 1/c₂ + 1/(c₁ + c₃)`. The
/// transported charge `Q(t) = ∫ i` enters `q^ℓ`, `q^{c₂}` fully and splits
/// between `q^{c₁}` and `q^{c₃}` in the ratio `c₁ : c₃`.
pub fn lc_circuit_state(t: f64, ell: f64, c: [f64; 3], z0: &[f64]) -> Vec<f64> {
    let [c1, c2, c3] = c;
    let kappa = 1.0 / c2 + 1.0 / (c1 + c3);
    let omega = (kappa / ell).sqrt();
    let u0 = z0[2] / c2 + z0[1] / c1;
    let i0 = z0[4] / ell;
    let (s, co) = (omega * t).sin_cos();
    let i = i0 * co - u0 / (ell * omega) * s;
    let charge = i0 / omega * s + u0 / (ell * omega * omega) * (co - 1.0);
    vec![
        z0[0] + charge,
        z0[1] + c1 / (c1 + c3) * charge,
        z0[2] + charge,
        z0[3] + c3 / (c1 + c3) * charge,
        ell * i,
        z0[5],
        z0[6],
        z0[7],
    ]
}
