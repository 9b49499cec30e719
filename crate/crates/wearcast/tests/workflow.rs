use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sole(args: &[&str]) -> Output {
    let o = Command::new(env!("CARGO_BIN_EXE_sole")).args(args).output().unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRAIN: &[&str] = &["--base-channels", "2", "--lr", "1e-3", "--batch-size", "64", "--checkpoint-every", "1"];

#[test]
fn generate_denoise_train_resume_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, clean, run) = (tmp.path().join("data"), tmp.path().join("clean"), tmp.path().join("run"));
    sole(&["generate", "--seed", "3", "--downsample", "4", "--out", s(&data)]);
    let o = sole(&["denoise", "--manifest", s(&data), "--out", s(&clean), "--register"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("denoised 52 images"));
    assert_eq!(fs::read_dir(clean.join("denoised")).unwrap().count(), 52);

    let mut args = vec!["train", "--manifest", s(&clean), "--out", s(&run), "--epochs", "3"];
    args.extend(TRAIN);
    let o = sole(&args);
    let log = String::from_utf8_lossy(&o.stdout);
    assert!(log.contains("462 training pairs"), "{log}");
    let straight = fs::read(run.join("checkpoint.wck")).unwrap();
    let curve = fs::read_to_string(run.join("loss.csv")).unwrap();
    assert_eq!(curve.lines().count(), 4);
    assert!(curve.starts_with("epoch,mean_loss\n1,"));

    // Two epochs, then resume to three: identical to the straight run.
    let split = tmp.path().join("split");
    let mut args = vec!["train", "--manifest", s(&clean), "--out", s(&split), "--epochs", "2"];
    args.extend(TRAIN);
    sole(&args);
    let first = s(&split).to_string() + "/checkpoint.wck";
    let copy = tmp.path().join("two.wck");
    fs::copy(&first, &copy).unwrap();
    let mut args = vec!["train", "--manifest", s(&clean), "--out", s(&split), "--epochs", "3", "--resume", s(&copy)];
    args.extend(TRAIN);
    sole(&args);
    assert_eq!(fs::read(split.join("checkpoint.wck")).unwrap(), straight);
    assert_eq!(fs::read_to_string(split.join("loss.csv")).unwrap(), curve);

    let ck = run.join("checkpoint.wck");
    let report = tmp.path().join("report");
    let o = sole(&["evaluate", "--checkpoint", s(&ck), "--manifest", s(&clean), "--out", s(&report)]);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("Mean") && table.contains("STD") && table.contains("persistence"), "{table}");
    let csv = fs::read_to_string(report.join("report.csv")).unwrap();
    assert!(csv.starts_with("label,variant,side,x_week,y_week,ssim,ssim_global,psnr\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 240);

    // The backward model trains on the latest weeks.
    let back = tmp.path().join("back");
    let mut args = vec!["train", "--manifest", s(&clean), "--out", s(&back), "--epochs", "1", "--variant", "backward"];
    args.extend(TRAIN);
    let o = sole(&args);
    assert!(String::from_utf8_lossy(&o.stdout).contains("backward model: 882 training pairs"));
}
