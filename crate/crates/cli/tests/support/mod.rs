#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use lamom::linalg::ComplexMatrix;
use lamom::maps::{superop_from_fn, MapProvenance, PositiveMapSpec};
use lamom::states::{horodecki_state, max_entangled_state, maximally_mixed, BipartiteDims};
use tempfile::TempDir;

pub fn lamom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamom"))
        .args(args)
        .env_remove("LAMOM_DIM_LIMIT")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

/// Input files written into a temporary directory.
pub struct Fixtures {
    pub dir: TempDir,
}

impl Fixtures {
    pub fn new() -> Self {
        let f = Self {
            dir: tempfile::tempdir().expect("tempdir"),
        };
        let qutrits = BipartiteDims::new(3, 3);
        maximally_mixed(qutrits)
            .to_file(f.path("mixed.json"))
            .unwrap();
        horodecki_state(3.5)
            .unwrap()
            .to_file(f.path("sigma35.json"))
            .unwrap();
        max_entangled_state(3)
            .to_file(f.path("psi_plus.json"))
            .unwrap();

        f.write("malformed.json", "{\"dA\": 3, \"dB\": 3, \"matrix\": [[");
        f.write("empty.json", "");
        f.write(
            "wrong_dims.json",
            r#"{"dA": 2, "dB": 2, "matrix": [[[1,0]]]}"#,
        );
        f.write(
            "unknown_field.json",
            r#"{"dA": 1, "dB": 1, "matrix": [[[1,0]]], "extra": 1}"#,
        );
        f.write(
            "bad_trace.json",
            r#"{"dA": 1, "dB": 2, "matrix": [[[0.5,0],[0,0]],[[0,0],[0.4,0]]]}"#,
        );
        f.write(
            "non_hermitian.json",
            r#"{"dA": 1, "dB": 2, "matrix": [[[0.5,0],[0.3,0]],[[0,0],[0.5,0]]]}"#,
        );
        f.write(
            "negative.json",
            r#"{"dA": 1, "dB": 2, "matrix": [[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}"#,
        );
        f.write("nan.json", r#"{"dA": 1, "dB": 1, "matrix": [[[NaN,0]]]}"#);

        // X ↦ 2Xᵀ − Tr[X]·I/3: trace preserving but far from positive, so
        // the normalized image of Ψ⁺ has q₂ > 1.
        let overshoot = superop_from_fn(3, |x| {
            let shift = ComplexMatrix::identity(3).scale(x.trace().re / 3.0);
            &x.transpose().scale(2.0) - &shift
        });
        f.write_map("overshoot_map.json", "overshoot", overshoot);
        f.write_map("zero_map.json", "zero", ComplexMatrix::zeros(9, 9));
        f.write(
            "bad_map.json",
            r#"{"name": "broken", "dim": 3, "superop": [[1]]}"#,
        );
        f
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }

    fn write_map(&self, name: &str, label: &str, superop: ComplexMatrix) {
        let spec =
            PositiveMapSpec::from_superop(label, 3, superop, MapProvenance::UserSupplied).unwrap();
        self.write(name, &spec.to_json_string());
    }

    pub fn missing(&self) -> String {
        self.dir
            .path()
            .join("does_not_exist.json")
            .to_string_lossy()
            .into_owned()
    }
}
