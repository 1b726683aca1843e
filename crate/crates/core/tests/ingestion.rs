use lcb_core::curve::PlateauParams;
use lcb_core::io::{SchemaOptions, WeldTypeKey, ingest_reader, records_csv};
use lcb_core::regression::OperatorRecord;
use lcb_core::synth::{SynthConfig, generate_cohort};
use lcb_core::Error;
use proptest::prelude::*;

fn ingest(text: &str) -> lcb_core::Result<lcb_core::io::InspectionDataset> {
    ingest_reader(text.as_bytes(), "inline", &SchemaOptions::default())
}

#[test]
fn table_one_row_parses() {
    let d = ingest("operator_id,total_welds,repaired_welds\n1,208,9\n").unwrap();
    let r = &d.group(&WeldTypeKey::all()).unwrap()[0];
    assert_eq!(*r, OperatorRecord::new(1u64, 208, 9).unwrap());
    assert!((r.fraction_nonconforming() - 0.043).abs() < 5e-4);
}

#[test]
fn impossible_counts_are_logged_not_dropped() {
    let d = ingest("operator_id,total_welds,repaired_welds\n1,208,9\n7,50,60\n8,0,0\n").unwrap();
    assert_eq!(d.group(&WeldTypeKey::all()).unwrap().len(), 1);
    assert_eq!(d.provenance.rows_rejected, 2);
    assert_eq!(d.provenance.rejected[0].line, 3);
    assert_eq!(d.provenance.rejected[0].operator_id, "7");
}

#[test]
fn duplicate_operator_rows_are_summed() {
    let d = ingest("operator_id,total_welds,repaired_welds\n3,10,1\n# note\n3,5,0\n").unwrap();
    assert_eq!(d.group(&WeldTypeKey::all()).unwrap(), &[OperatorRecord::new(3u64, 15, 1).unwrap()]);
    assert_eq!(d.provenance.rows_merged, 1);
}

#[test]
fn weld_type_columns_split_groups() {
    let text = "operator_id,total_welds,repaired_welds,pipe_schedule,nominal_pipe_size,material_type,weld_type\n\
                1,10,1,STD,2,CS,BW\n1,20,2,XS,4,CS,BW\n2,30,0,STD,2,CS,BW\n";
    let d = ingest(text).unwrap();
    assert_eq!(d.groups.len(), 2);
    let std: WeldTypeKey = "STD,2,CS,BW".parse().unwrap();
    assert_eq!(d.group(&std).unwrap().len(), 2);
    assert!(matches!(d.resolve_group(None), Err(Error::InvalidConfig(_))));
}

#[test]
fn structural_problems_are_errors() {
    assert!(matches!(ingest("operator_id,total_welds\n1,2\n"), Err(Error::MissingColumn(c)) if c == "repaired_welds"));
    match ingest("operator_id,total_welds,repaired_welds\n1,ten,1\n2,5,0\n3,4,x\n") {
        Err(Error::UnparseableRow(issues)) => {
            assert_eq!(issues.iter().map(|i| i.line).collect::<Vec<_>>(), vec![2, 4]);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(ingest("operator_id,total_welds,repaired_welds\n7,50,60\n"), Err(Error::EmptyDataset)));
}

#[test]
fn simulated_cohort_round_trips() {
    let cfg = SynthConfig::new(PlateauParams::published(), 0.0184, 150, (1, 2000), 8).unwrap();
    let records = generate_cohort(&cfg).unwrap();
    for key in [None, Some("SCH40,6,SS,SW".parse::<WeldTypeKey>().unwrap())] {
        let d = ingest(&records_csv(&records, key.as_ref()).unwrap()).unwrap();
        let group = key.unwrap_or_else(WeldTypeKey::all);
        assert_eq!(d.group(&group).unwrap(), records.as_slice());
        assert_eq!(d.provenance.rows_read, 150);
    }
}

proptest! {
    #[test]
    fn every_row_is_accounted_for(rows in prop::collection::vec((1u8..12, 0u64..40, 0u64..40), 1..60)) {
        let mut text = String::from("operator_id,total_welds,repaired_welds\n");
        for (id, n, x) in &rows {
            text.push_str(&format!("{id},{n},{x}\n"));
        }
        match ingest(&text) {
            Ok(d) => {
                let p = &d.provenance;
                prop_assert_eq!(p.rows_read, rows.len());
                prop_assert_eq!(p.rows_accepted + p.rows_merged + p.rows_rejected, p.rows_read);
                let kept: u64 = rows.iter().filter(|(_, n, x)| *n >= 1 && x <= n).map(|(_, n, _)| n).sum();
                let total: u64 = d.group(&WeldTypeKey::all()).unwrap().iter().map(|r| r.n_total).sum();
                prop_assert_eq!(kept, total);
            }
            Err(Error::EmptyDataset) => prop_assert!(rows.iter().all(|(_, n, x)| *n == 0 || x > n)),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
