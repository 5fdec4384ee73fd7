use fraclap::analysis::{extension_constant, gamma};
use fraclap::domain::{BoxGrid, SubDomain};
use fraclap::operators::{compare_spectra, difference_operator};

#[test]
fn operators_work_in_f32() {
    let grid = BoxGrid::<f32>::new(1, 1.0, 32).unwrap();
    let mask = (0..32).map(|i| (12..20).contains(&i)).collect();
    let omega = SubDomain::from_mask(grid, mask).unwrap();
    let cmp = compare_spectra(&omega, &grid, 0.5f32).unwrap();
    assert!(cmp.min_margin() > 0.0);
    let diff = difference_operator(&omega, &grid, 0.5f32).unwrap();
    assert!(diff.min_eigenvalue() > -1e-3);
}

#[test]
fn special_functions_in_f32() {
    assert!((gamma(0.5f32).unwrap() - std::f32::consts::PI.sqrt()).abs() < 1e-5);
    assert!((extension_constant(0.5f32).unwrap() - 1.0).abs() < 1e-5);
}
