// Pin one coordinate of an OU model and inspect the reduced model.
//
// `cargo run --example intervene_ou`

use ou_intervene::{intervene_ou, intervene_seq, Intervention, Matrix, OuModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = OuModel::new(
        vec![0.0; 3],
        vec![1.0, 2.0, 3.0],
        Matrix::from_rows(&[[-1.0, 0.5, 0.3], [0.0, -2.0, 0.7], [0.0, 0.0, -1.5]])?,
        Matrix::identity(3),
    )?;

    let (reduced, record) = intervene_ou(&model, Intervention::new(2, 0.0))?;
    println!("pinned {:?}, surviving {:?}", record.fixed(), reduced.labels());
    println!("reduced speed {:?}", reduced.speed().to_rows());
    println!("reduced level {:?}", reduced.level());

    // The reduced drift is the original drift with X2 held at 0.
    let y = [0.4, -1.2];
    let full = model.drift(&record.lift(&y));
    println!("drift at {y:?}: {:?} (original rows: {:?})", reduced.drift(&y), record.restrict(&full));

    let (twice, record) = intervene_seq(&model, &[Intervention::new(3, 1.0), Intervention::new(2, 0.0)])?;
    println!("after pinning X3 and X2: {:?} with level {:?}, fixed {:?}", twice.labels(), twice.level(), record.fixed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
