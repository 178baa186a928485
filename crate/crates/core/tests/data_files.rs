use owc_core::device::HydroCoefficients;
use owc_core::turbine::{CavitationTable, CharacteristicCurves, FIT_TOLERANCE};
use owc_core::wave::ScatterDiagram;
use std::path::Path;

#[test]
fn shipped_data_matches_generator_and_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for (name, text) in owc_core::synthetic::data_files().unwrap() {
        let shipped = std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(shipped, text, "{name} is stale; rerun the write_data example");
        match name {
            "turbine_curves.csv" => drop(CharacteristicCurves::from_csv(name, &text, FIT_TOLERANCE).unwrap()),
            "cavitation.csv" => drop(CavitationTable::from_csv(name, &text).unwrap()),
            "scatter.csv" => drop(ScatterDiagram::from_csv(name, &text).unwrap()),
            _ => drop(HydroCoefficients::from_csv(name, &text).unwrap()),
        }
    }
}
