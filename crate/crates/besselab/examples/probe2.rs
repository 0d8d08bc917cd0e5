use besselab::equilibrium::solve_equilibrium_one_band;
use besselab::parametrix::*;
use besselab::potential::Potential;
use besselab::szego::solve_xi;
use besselab::Side;
use num_complex::Complex64;

fn main() {
    let p = Potential::quadratic();
    let eq = solve_equilibrium_one_band(&p).unwrap();
    let _sd = solve_xi(&eq.support, 0.0).unwrap();
    let alpha = 0.0;
    let n = 42.0_f64;
    let delta = eq.default_delta();
    let z = Complex64::from_polar(delta, 3.6);
    let f = eq.conformal_map_f(z).unwrap();
    let zeta = f * n;
    let sector = SectorId::from_arg(zeta.im.atan2(zeta.re));
    println!("sector = {:?}, zeta = {zeta}", sector);

    // identity check: psi via sector constants == B e^{-i zeta s3} Jinv X
    let psi = psi_model_sector(alpha, zeta, sector).unwrap();
    // reconstruct B the same way local_parametrix does
    let fm = {
        // psi_sector_one is private; recover F = psi_model_sector with sector I constant = identity
        psi_model_sector(alpha, zeta, SectorId::I).unwrap()
    };
    let ei = (Complex64::new(0.0, 1.0) * zeta).exp();
    let b = Matrix2::new(fm.m[0][0]*ei, fm.m[0][1]/ei, fm.m[1][0]*ei, fm.m[1][1]/ei);
    let e_m_iz = Matrix2::sigma3_power((Complex64::new(0.0, -1.0)*zeta).exp());
    let jinv = Matrix2::j_matrix().inverse();
    // X_s = J * C_s
    let c_s = psi_model_sector(alpha, Complex64::new(3.0, -3.0), sector).unwrap(); // dummy
    let _ = c_s;
    // direct re-derivation: psi2 = B e^{-izs3} * C_s where C_s = Jinv * X_s
    // compare psi vs b * e^{-i zeta s3} * (F^{-1} * psi)  -- trivially equal; instead
    // check the exponent identity: i zeta - n phi == n phi_+(0)
    let phi = eq.eval_phi(z, None).unwrap();
    let lhs = Complex64::new(0.0, 1.0) * zeta - phi * n;
    let rhs = eq.phi_plus_zero() * n;
    println!("i z - n phi = {lhs}, n phi_+(0) = {rhs}, diff = {}", (lhs - rhs).norm());

    // and e^{i zeta s3} X W^{-s3} e^{-i zeta s3} boundedness
    println!("psi = {:?}", psi.m[0]);
    println!("b*e^(-izs3)*Jinv row0 = {:?}", b.mul(&e_m_iz).mul(&jinv).m[0]);

    // full local parametrix both branches around the switch for SAME z by scaling n slightly
    let _ = Side::Plus;
}
