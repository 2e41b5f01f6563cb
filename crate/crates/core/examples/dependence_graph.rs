// Dependence graphs before and after pinning a coordinate, as DOT.
//
// `cargo run --example dependence_graph`

use ou_intervene::{dependence_graph, intervene_ou, Intervention, Matrix, OuModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = OuModel::new(
        vec![0.0; 3],
        vec![1.0, 2.0, 3.0],
        Matrix::from_rows(&[[-1.0, 0.5, 0.3], [0.0, -2.0, 0.7], [0.0, 0.0, -1.5]])?,
        Matrix::identity(3),
    )?;
    let graph = dependence_graph(&model, 0.0);
    print!("{}", graph.to_dot());

    // Pinned node kept, incoming edges cut.
    print!("{}", graph.with_intervention(2).to_dot());

    // Reduced model: the pinned node is gone.
    let (reduced, _) = intervene_ou(&model, Intervention::new(2, 1.0))?;
    for (from, to) in dependence_graph(&reduced, 0.0).labeled_edges() {
        println!("{from} -> {to}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
