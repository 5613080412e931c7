#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dq_core::data::{write_f32le, SignalBlock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn dq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dq")).args(args).output().expect("dq runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// 200 visits of 80 patients with a few gaps. Returns the descriptor path.
pub fn small_dataset(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut csv = String::from("visit,patient,age,sex,label,visited\n");
    for i in 0..200 {
        let age = if i % 17 == 0 { String::new() } else { format!("{}", rng.random_range(20..90)) };
        let sex = if rng.random_bool(0.7) { "M" } else { "F" };
        let label = if rng.random_bool(0.8) { "a" } else { "b" };
        writeln!(csv, "{i},{},{age},{sex},{label},2020-01-{:02}", i % 80, 1 + i % 28).unwrap();
    }
    fs::write(dir.join("visits.csv"), csv).unwrap();
    let desc = serde_json::json!({
        "dataset_id": "visits",
        "table": {"path": "visits.csv"},
        "columns": [
            {"name": "visit", "vtype": "identifier"},
            {"name": "patient", "vtype": "identifier", "role": "patient_id"},
            {"name": "age", "vtype": "numerical"},
            {"name": "sex", "vtype": "categorical"},
            {"name": "label", "vtype": "categorical", "role": "target"},
            {"name": "visited", "vtype": "datetime", "role": "timestamp"}
        ],
        "evaluation_time": "2021-01-01T00:00:00Z"
    });
    let path = dir.join("visits.json");
    fs::write(&path, serde_json::to_string_pretty(&desc).unwrap()).unwrap();
    path
}

const DB_HEADER: &str = "ecg_id,patient_id,age,sex,height,weight,nurse,site,device,recording_date,report,scp_codes,\
heart_axis,infarction_stadium1,infarction_stadium2,validated_by,second_opinion,initial_autogenerated_report,\
validated_by_human,baseline_drift,static_noise,burst_noise,electrodes_problems,extra_beats,pacemaker,strat_fold,\
filename_lr,filename_hr";

/// A PTB-XL shaped directory with `n` records, converted one-lead payloads
/// and an `scp_statements.csv`. Records from index `n - n_cs12` on use
/// device CS-12; the first `n_norm` carry only NORM.
pub fn fake_ptbxl(root: &Path, n: usize, n_norm: usize, n_cs12: usize, n_female: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    fs::write(
        root.join("scp_statements.csv"),
        ",description,diagnostic,diagnostic_class\nNORM,normal ECG,1.0,NORM\nIMI,inferior MI,1.0,MI\n\
         NDT,non-diagnostic T,1.0,STTC\nSR,sinus rhythm,,\n",
    )
    .unwrap();
    let mut db = format!("{DB_HEADER}\n");
    for i in 0..n {
        let id = i + 1;
        let folder = format!("records500/{:05}", (id / 1000) * 1000);
        fs::create_dir_all(root.join(&folder)).unwrap();
        let hr = format!("{folder}/{id:05}_hr");
        let samples: Vec<f64> = (0..200).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let block = SignalBlock::new(vec![samples], 500.0, vec!["I".into()]).unwrap();
        write_f32le(&block, &root.join(format!("{hr}.f32"))).unwrap();
        let codes = if i < n_norm {
            "{'NORM': 100.0, 'SR': 0.0}"
        } else if i % 2 == 0 {
            "{'IMI': 50.0}"
        } else {
            "{'NDT': 100.0, 'IMI': 15.0}"
        };
        let sex = u8::from(i % (n / n_female.max(1)).max(1) == 0 && i / (n / n_female.max(1)).max(1) < n_female);
        let device = if i >= n - n_cs12 { "CS-12   E" } else if i % 3 == 0 { "AT-6 C" } else { "CS100    3" };
        let height = if i % 3 == 0 { String::new() } else { format!("{}", rng.random_range(150..195)) };
        writeln!(
            db,
            "{id},{},{},{sex},{height},{},{},{},{device},2000-{:02}-{:02} 10:00:00,report {id},\"{codes}\",\
             LAD,,,{},,False,True,,,,,,,{},records100/{id:05}_lr,{hr}",
            10_000 + i / 2,
            rng.random_range(18..90),
            rng.random_range(50..110),
            i % 11,
            i % 3,
            1 + i % 12,
            1 + i % 28,
            i % 4,
            1 + i % 10
        )
        .unwrap();
    }
    fs::write(root.join("ptbxl_database.csv"), db).unwrap();
}
