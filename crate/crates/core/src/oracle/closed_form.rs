/// `E_x[exp(-α|x_T|²) exp{(1/D) ∫₀ᵀ -½ω²|x_u|² du}]` for `dx = √D dW` in
/// `R^dof`; a product over coordinates of the Mehler kernel.
///
/// Per coordinate, with `y = x/√D`, `β = α D` and `A0 = 2β/ω`:
/// `u = exp(-(ω/2) A(T) y² - ½ ln(cosh ωT + A0 sinh ωT))` and
/// `A(T) = (A0 + tanh ωT) / (1 + A0 tanh ωT)`.
pub fn mehler_gaussian(x0: &[f64], alpha: f64, omega: f64, diffusion: f64, t: f64) -> f64 {
    if omega == 0.0 {
        return heat_gaussian(x0, alpha, diffusion, t);
    }
    let a0 = 2.0 * alpha * diffusion / omega;
    let (s, c) = ((omega * t).sinh(), (omega * t).cosh());
    let th = (omega * t).tanh();
    let a = 0.5 * omega * (a0 + th) / (1.0 + a0 * th);
    let log_norm = -0.5 * (c + a0 * s).ln();
    x0.iter()
        .map(|&x| (-a * x * x / diffusion + log_norm).exp())
        .product()
}

/// `E_x[exp(-α|x_T|²)]` for `dx = √D dW`:
/// `(1 + 2αDT)^{-dof/2} exp(-α|x|² / (1 + 2αDT))`.
pub fn heat_gaussian(x0: &[f64], alpha: f64, diffusion: f64, t: f64) -> f64 {
    let s = 1.0 + 2.0 * alpha * diffusion * t;
    let r2: f64 = x0.iter().map(|x| x * x).sum();
    s.powf(-0.5 * x0.len() as f64) * (-alpha * r2 / s).exp()
}
