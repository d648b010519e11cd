//! Distance from a subspace to the ill-posed subspaces, with the two orthant
//! minima that decide which side it lies on.

use ineqcond::condition::grassmann_distance;
use ineqcond::model::projection_distance;
use ineqcond::Subspace;
use nalgebra::DMatrix;

fn main() -> ineqcond::Result<()> {
    let cases = [
        (
            "diagonal line in R^2",
            DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
        ),
        (
            "line through (1,-1,0)",
            DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 0.0]),
        ),
        (
            "plane of (0.2,1,1),(0,-1,1)",
            DMatrix::from_column_slice(3, 2, &[0.2, 1.0, 1.0, 0.0, -1.0, 1.0]),
        ),
        (
            "line through (1,2,3,4)",
            DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]),
        ),
    ];
    for (label, spanning) in cases {
        let w = Subspace::from_spanning_columns(&spanning)?;
        let d = grassmann_distance(&w)?;
        println!(
            "{label:<28} d = {:.6}  side {:?}  (min|Π_W x| = {:.2e}, min|Π_W⊥ x| = {:.2e})",
            d.distance, d.side, d.row_space_gap, d.complement_gap
        );
    }

    let a = Subspace::from_spanning_columns(&DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]))?;
    let b = Subspace::from_spanning_columns(&DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]))?;
    println!(
        "d(span e1, span(e1+e2)) = {:.6} (sin 45°)",
        projection_distance(&a, &b)?
    );
    Ok(())
}
