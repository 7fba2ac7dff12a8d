//! Ingestion rejects bad rows with file, line and reason; the analysis then
//! runs on whatever validated data is supplied.

use csqvr::analysis::{analyze, AnalysisConfig};
use csqvr::io::{ingest_bytes, IngestError, RESPONSES_FILE};

fn main() {
    let bad = "participant,stage,instrument,item_1,item_2,item_3,item_4,item_5,item_6\n\
               P01,baseline,CSQVR_vr,1,2,3,4,5,6\n\
               P01,baseline,CSQVR_vr,1,2,3,4,5,6\n\
               P02,baseline,CSQVR_vr,1,2,3,4,9,6\n\
               P03,ride1,CSQVR_vr,1,2,3,4,5\n";
    match ingest_bytes(&[(RESPONSES_FILE, bad.as_bytes())]) {
        Err(IngestError::Rejected(rows)) => rows.iter().for_each(|r| println!("rejected {r}")),
        other => println!("unexpected: {other:?}"),
    }

    let good = "participant,stage,instrument,item_1,item_2,item_3,item_4,item_5,item_6\n\
                P01,baseline,CSQVR_vr,1,2,3,4,5,6\n\
                P02,baseline,CSQVR_vr,2,2,1,1,3,2\n";
    let data = ingest_bytes(&[(RESPONSES_FILE, good.as_bytes())]).expect("valid rows");
    let report = analyze(&data, &AnalysisConfig::default(), vec![]);
    for section in report.not_computable() {
        println!("not computable: {section}");
    }
}
