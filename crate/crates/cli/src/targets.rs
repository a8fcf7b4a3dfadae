use lattice::Target;

/// Names accepted by `steer --target`.
pub const CANONICAL: [&str; 5] = ["zero", "tent", "plateau", "w", "stairs"];

/// The canonical piecewise-affine targets on `[0, 1]`.
pub fn canonical(name: &str) -> Option<Target> {
    let pairs: &[((i128, i128), (i128, i128))] = match name {
        "zero" => return Some(Target::zero()),
        "tent" => &[((0, 1), (0, 1)), ((1, 2), (1, 1)), ((1, 1), (0, 1))],
        "plateau" => &[((0, 1), (0, 1)), ((1, 4), (1, 2)), ((3, 4), (1, 2)), ((1, 1), (0, 1))],
        "w" => &[((0, 1), (0, 1)), ((1, 4), (1, 2)), ((1, 2), (0, 1)), ((3, 4), (1, 2)), ((1, 1), (0, 1))],
        "stairs" => &[
            ((0, 1), (0, 1)),
            ((1, 8), (1, 4)),
            ((1, 4), (1, 4)),
            ((3, 8), (1, 2)),
            ((1, 2), (1, 2)),
            ((5, 8), (3, 4)),
            ((3, 4), (3, 4)),
            ((1, 1), (0, 1)),
        ],
        _ => return None,
    };
    Target::from_pairs(pairs).ok()
}
