use ndarray::{concatenate, s, Axis};
use scribe_core::dataset::{assemble_dataset, ExtractConfig};
use scribe_core::reduce::ReducerKind;
use scribe_core::shift::{scan_document, ShiftProtocolConfig};
use scribe_core::synth::{render_pages, HandStyle, PageSpec};

#[test]
fn scan_on_generated_documents() {
    let spec = PageSpec::default();
    let cfg = ExtractConfig { seed: 1, ..ExtractConfig::default() };
    let a = assemble_dataset(&render_pages(&HandStyle::hand_a(), &spec, 0, 7, 1), &cfg).unwrap().to_matrix::<f64>();
    let b = assemble_dataset(&render_pages(&HandStyle::hand_b(), &spec, 0, 10, 2), &cfg).unwrap().to_matrix::<f64>();
    assert!(a.nrows() >= 600 && b.nrows() >= 300, "{} {}", a.nrows(), b.nrows());
    let proto = ShiftProtocolConfig::default();

    let homogeneous = scan_document::<f64>(&a.slice(s![..600, ..]).to_owned(), ReducerKind::Pca, &proto).unwrap();
    assert!(homogeneous.longest_flag_run() <= 1, "{:?}", homogeneous.flagged_rows());

    let doc = concatenate(Axis(0), &[a.slice(s![..500, ..]), b.slice(s![..300, ..])]).unwrap();
    let spliced = scan_document::<f64>(&doc, ReducerKind::Pca, &proto).unwrap();
    let at = spliced.points.iter().find(|p| p.boundary_row == 500).unwrap();
    assert!(at.flagged);
    let peak = spliced
        .points
        .iter()
        .max_by(|x, y| x.mean_delta.total_cmp(&y.mean_delta))
        .unwrap();
    assert!(peak.boundary_row.abs_diff(500) <= proto.page_rows, "peak at {}", peak.boundary_row);
    // windows whose right half reaches the second hand may flag; earlier ones must not
    let reach = proto.pages_per_side * proto.page_rows;
    assert!(spliced.flagged_rows().iter().all(|&r| r >= 500 - reach), "{:?}", spliced.flagged_rows());
}
