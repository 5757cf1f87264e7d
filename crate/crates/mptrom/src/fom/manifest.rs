//! Ingest of externally assembled models via a JSON manifest plus Matrix
//! Market files, and the matching export used for round-trip checks.

use super::mm_io::{read_sparse_matrix, read_vector, write_real_vector, write_sparse_matrix, MmSymmetry};
use super::{DiscretizationInfo, FomError, FullOrderModel, MaterialParams};
use crate::linalg::SparseComplexMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestMaterials {
    pub alpha: f64,
    pub sigma_star: f64,
    pub mu_r: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestMatrices {
    #[serde(rename = "K")]
    pub k: String,
    #[serde(rename = "C")]
    pub c: String,
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "C1", default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<String>,
    #[serde(rename = "C2", default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<String>,
    /// Full-domain mass matrix for the norm `S = K + M_full`.
    #[serde(rename = "M_full", default, skip_serializing_if = "Option::is_none")]
    pub m_full: Option<String>,
    /// Explicit norm matrix; wins over `M_full` when both appear.
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestVectors {
    pub o1: String,
    pub o2: String,
    pub o3: String,
    pub s1: String,
    pub s2: String,
    pub s3: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t3: Option<String>,
}

/// Optional frequency-independent source factors `c_hat_i`
/// (`r_i[w] = i w c_hat_i`) for models that do not use the shared basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestSources {
    pub r1: String,
    pub r2: String,
    pub r3: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FomManifest {
    pub n_dofs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_dofs: Option<usize>,
    pub matrices: ManifestMatrices,
    pub vectors: ManifestVectors,
    /// Row-major 3x3 table `c_ij`.
    pub c_ij: [f64; 9],
    pub materials: ManifestMaterials,
    #[serde(rename = "volume_B_alpha")]
    pub volume_b_alpha: f64,
    pub shared_basis: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<ManifestSources>,
}

impl FomManifest {
    pub fn from_file(path: &Path) -> Result<Self, FomError> {
        let text = fs::read_to_string(path).map_err(|e| FomError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| FomError::ParseError {
            file: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

fn real_vector(path: &Path, expect_len: usize, what: &str) -> Result<Vec<f64>, FomError> {
    let v = read_vector(path)?;
    if v.len() != expect_len {
        return Err(FomError::DimensionMismatch(format!(
            "{what} ({}) has {} entries, expected {expect_len}",
            path.display(),
            v.len()
        )));
    }
    let imag = v.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if imag > 0.0 {
        return Err(FomError::ParseError {
            file: path.display().to_string(),
            line: 0,
            message: format!("{what} must be real-valued, found imaginary part {imag:e}"),
        });
    }
    Ok(v.into_iter().map(|z| z.re).collect())
}

/// Loads and validates a full-order model from a manifest. Paths inside the
/// manifest resolve relative to the manifest's directory.
pub fn load_fom_from_files(manifest_path: &Path) -> Result<FullOrderModel, FomError> {
    let manifest = FomManifest::from_file(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |rel: &str| -> PathBuf { base.join(rel) };

    let n = manifest.n_dofs;
    let m_dofs = manifest.m_dofs.unwrap_or(n);
    if manifest.shared_basis && m_dofs != n {
        return Err(FomError::DimensionMismatch(
            "shared_basis manifests must have m_dofs == n_dofs".into(),
        ));
    }

    let check_square = |name: &str, mat: &SparseComplexMatrix, size: usize| {
        if mat.rows() != size || mat.cols() != size {
            Err(FomError::DimensionMismatch(format!(
                "{name} is {}x{}, expected {size}x{size}",
                mat.rows(),
                mat.cols()
            )))
        } else {
            Ok(())
        }
    };

    let stiffness = read_sparse_matrix(&resolve(&manifest.matrices.k))?;
    check_square("K", &stiffness, n)?;
    let conduction = read_sparse_matrix(&resolve(&manifest.matrices.c))?;
    check_square("C", &conduction, n)?;
    let reg_mass = read_sparse_matrix(&resolve(&manifest.matrices.m))?;
    check_square("M", &reg_mass, n)?;

    let c1 = match &manifest.matrices.c1 {
        Some(p) => {
            let m = read_sparse_matrix(&resolve(p))?;
            check_square("C1", &m, m_dofs)?;
            Some(m)
        }
        None => None,
    };
    let c2 = match &manifest.matrices.c2 {
        Some(p) => {
            let m = read_sparse_matrix(&resolve(p))?;
            if m.rows() != m_dofs || m.cols() != n {
                return Err(FomError::DimensionMismatch(format!(
                    "C2 is {}x{}, expected {m_dofs}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
            Some(m)
        }
        None => None,
    };
    let norm_mass = match &manifest.matrices.m_full {
        Some(p) => {
            let m = read_sparse_matrix(&resolve(p))?;
            check_square("M_full", &m, n)?;
            Some(m)
        }
        None => None,
    };
    let norm_override = match &manifest.matrices.s {
        Some(p) => {
            let m = read_sparse_matrix(&resolve(p))?;
            check_square("S", &m, n)?;
            Some(m)
        }
        None => None,
    };

    let theta0 = [
        real_vector(&resolve(&manifest.vectors.o1), m_dofs, "o1")?,
        real_vector(&resolve(&manifest.vectors.o2), m_dofs, "o2")?,
        real_vector(&resolve(&manifest.vectors.o3), m_dofs, "o3")?,
    ];
    let s_moment = [
        real_vector(&resolve(&manifest.vectors.s1), m_dofs, "s1")?,
        real_vector(&resolve(&manifest.vectors.s2), m_dofs, "s2")?,
        real_vector(&resolve(&manifest.vectors.s3), m_dofs, "s3")?,
    ];
    let t_paths = [
        manifest.vectors.t1.as_ref(),
        manifest.vectors.t2.as_ref(),
        manifest.vectors.t3.as_ref(),
    ];
    let mut t_moment: [Vec<f64>; 3] = Default::default();
    for dir in 0..3 {
        t_moment[dir] = match t_paths[dir] {
            Some(p) => real_vector(&resolve(p), n, &format!("t{}", dir + 1))?,
            None if manifest.shared_basis => s_moment[dir].clone(),
            None => {
                return Err(FomError::MissingPostprocData(format!(
                    "t{} is required when shared_basis is false",
                    dir + 1
                )))
            }
        };
    }

    let source_hat = match &manifest.sources {
        Some(src) => Some([
            real_vector(&resolve(&src.r1), n, "r1")?,
            real_vector(&resolve(&src.r2), n, "r2")?,
            real_vector(&resolve(&src.r3), n, "r3")?,
        ]),
        None => None,
    };

    let mut c_scalar = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c_scalar[i][j] = manifest.c_ij[3 * i + j];
        }
    }

    let materials = MaterialParams::new(
        manifest.materials.alpha,
        manifest.materials.sigma_star,
        manifest.materials.mu_r,
        manifest.materials.epsilon,
    )?;

    let mut fom = FullOrderModel {
        n_dofs: n,
        m_dofs,
        stiffness,
        conduction,
        reg_mass,
        c1: None,
        c2: None,
        theta0,
        s_moment,
        t_moment,
        c_scalar,
        materials,
        volume_b_alpha: manifest.volume_b_alpha,
        shared_basis: manifest.shared_basis,
        norm_mass,
        norm_override,
        source_hat,
        im: None,
        assembly: None,
        discretization: DiscretizationInfo {
            description: format!("ingested from {}", manifest_path.display()),
            order_p: 0,
        },
    };
    fom.set_c1_c2(c1, c2);
    fom.validate()?;
    Ok(fom)
}

/// Exports a model as manifest + Matrix Market files into `dir`. The emitted
/// files round-trip bit-exactly through [`load_fom_from_files`].
pub fn export_fom_to_files(fom: &FullOrderModel, dir: &Path) -> Result<PathBuf, FomError> {
    fs::create_dir_all(dir).map_err(|e| FomError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let write_mat = |name: &str, m: &SparseComplexMatrix| -> Result<String, FomError> {
        let file = format!("{name}.mtx");
        write_sparse_matrix(&dir.join(&file), m, MmSymmetry::Symmetric)?;
        Ok(file)
    };
    let write_vec = |name: &str, v: &[f64]| -> Result<String, FomError> {
        let file = format!("{name}.mtx");
        write_real_vector(&dir.join(&file), v)?;
        Ok(file)
    };

    let k = write_mat("K", &fom.stiffness)?;
    let c = write_mat("C", &fom.conduction)?;
    let m = write_mat("M", &fom.reg_mass)?;
    let m_full = match &fom.norm_mass {
        Some(mf) => Some(write_mat("M_full", mf)?),
        None => None,
    };
    let s = match &fom.norm_override {
        Some(sm) => Some(write_mat("S", sm)?),
        None => None,
    };
    let (c1, c2) = if fom.has_explicit_c1_c2() {
        (
            Some(write_mat("C1", fom.c1())?),
            Some({
                let file = "C2.mtx".to_string();
                write_sparse_matrix(&dir.join(&file), fom.c2(), MmSymmetry::General)?;
                file
            }),
        )
    } else {
        (None, None)
    };

    let vectors = ManifestVectors {
        o1: write_vec("o1", &fom.theta0[0])?,
        o2: write_vec("o2", &fom.theta0[1])?,
        o3: write_vec("o3", &fom.theta0[2])?,
        s1: write_vec("s1", &fom.s_moment[0])?,
        s2: write_vec("s2", &fom.s_moment[1])?,
        s3: write_vec("s3", &fom.s_moment[2])?,
        t1: Some(write_vec("t1", &fom.t_moment[0])?),
        t2: Some(write_vec("t2", &fom.t_moment[1])?),
        t3: Some(write_vec("t3", &fom.t_moment[2])?),
    };
    let sources = match &fom.source_hat {
        Some(hats) => Some(ManifestSources {
            r1: write_vec("r1", &hats[0])?,
            r2: write_vec("r2", &hats[1])?,
            r3: write_vec("r3", &hats[2])?,
        }),
        None => None,
    };

    let mut c_ij = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            c_ij[3 * i + j] = fom.c_scalar[i][j];
        }
    }
    let manifest = FomManifest {
        n_dofs: fom.n_dofs,
        m_dofs: if fom.m_dofs == fom.n_dofs {
            None
        } else {
            Some(fom.m_dofs)
        },
        matrices: ManifestMatrices {
            k,
            c,
            m,
            c1,
            c2,
            m_full,
            s,
        },
        vectors,
        c_ij,
        materials: ManifestMaterials {
            alpha: fom.materials.alpha,
            sigma_star: fom.materials.sigma_star,
            mu_r: fom.materials.mu_r,
            epsilon: fom.materials.epsilon,
        },
        volume_b_alpha: fom.volume_b_alpha,
        shared_basis: fom.shared_basis,
        sources,
    };
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(|e| FomError::Io {
        path: manifest_path.display().to_string(),
        source: e,
    })?;
    Ok(manifest_path)
}

#[allow(dead_code)]
fn complex_vec(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::{build_radial_sphere_fom, GradingScheme, MeshGrading, RadialSphereParams};
    use tempfile::tempdir;

    fn small_sphere() -> FullOrderModel {
        let m = MaterialParams::new(1e-3, 1e6, 32.0, 1e-10).unwrap();
        let tau = crate::fom::nondim_skin_depth(1e8, &m).unwrap();
        let grading = MeshGrading::new(GradingScheme::GeometricIncreasing, 2, tau).unwrap();
        let mut params = RadialSphereParams::new(m, grading);
        params.n_interior = 4;
        params.n_exterior = 8;
        params.order_p = 2;
        build_radial_sphere_fom(&params).unwrap()
    }

    #[test]
    fn export_ingest_roundtrip_is_bit_exact() {
        let fom = small_sphere();
        let dir = tempdir().unwrap();
        let manifest_path = export_fom_to_files(&fom, dir.path()).unwrap();
        let back = load_fom_from_files(&manifest_path).unwrap();

        assert_eq!(fom.n_dofs, back.n_dofs);
        assert_eq!(fom.stiffness, back.stiffness);
        assert_eq!(fom.conduction, back.conduction);
        assert_eq!(fom.reg_mass, back.reg_mass);
        assert_eq!(fom.norm_mass.as_ref().unwrap(), back.norm_mass.as_ref().unwrap());
        for dir in 0..3 {
            assert_eq!(fom.theta0[dir], back.theta0[dir]);
            assert_eq!(fom.s_moment[dir], back.s_moment[dir]);
            assert_eq!(fom.t_moment[dir], back.t_moment[dir]);
        }
        assert_eq!(fom.c_scalar, back.c_scalar);
        assert_eq!(fom.volume_b_alpha, back.volume_b_alpha);
        assert_eq!(fom.materials.nu_tilde(), back.materials.nu_tilde());
    }

    #[test]
    fn missing_t_aliases_to_s_under_shared_basis() {
        let fom = small_sphere();
        let dir = tempdir().unwrap();
        let manifest_path = export_fom_to_files(&fom, dir.path()).unwrap();

        // Drop the t entries from the manifest.
        let text = std::fs::read_to_string(&manifest_path).unwrap();
        let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
        let vecs = json["vectors"].as_object_mut().unwrap();
        vecs.remove("t1");
        vecs.remove("t2");
        vecs.remove("t3");
        std::fs::write(&manifest_path, serde_json::to_string(&json).unwrap()).unwrap();

        let back = load_fom_from_files(&manifest_path).unwrap();
        for d in 0..3 {
            assert_eq!(back.t_moment[d], back.s_moment[d]);
        }
    }

    #[test]
    fn corrupted_symmetric_entry_is_rejected() {
        let fom = small_sphere();
        let dir = tempdir().unwrap();
        let manifest_path = export_fom_to_files(&fom, dir.path()).unwrap();

        // Rewrite K in general format with one mirrored entry perturbed.
        let k_path = dir.path().join("K.mtx");
        let k = fom.stiffness.clone();
        let mut triplets: Vec<(usize, usize, num_complex::Complex64)> = k.iter().collect();
        let target = triplets
            .iter()
            .position(|&(r, c, _)| r < c)
            .expect("off-diagonal entry");
        triplets[target].2 *= 1.0 + 1e-6;
        let broken =
            crate::linalg::SparseComplexMatrix::from_triplets(k.rows(), k.cols(), &triplets)
                .unwrap();
        crate::fom::mm_io::write_sparse_matrix(&k_path, &broken, MmSymmetry::General).unwrap();

        match load_fom_from_files(&manifest_path) {
            Err(FomError::SymmetryViolation { name, .. }) => assert_eq!(name, "K"),
            other => panic!("expected SymmetryViolation, got {other:?}"),
        }
    }

    #[test]
    fn manifest_dimension_mismatch_detected() {
        let fom = small_sphere();
        let dir = tempdir().unwrap();
        let manifest_path = export_fom_to_files(&fom, dir.path()).unwrap();
        let text = std::fs::read_to_string(&manifest_path).unwrap();
        let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
        json["n_dofs"] = serde_json::json!(fom.n_dofs + 1);
        std::fs::write(&manifest_path, serde_json::to_string(&json).unwrap()).unwrap();
        assert!(matches!(
            load_fom_from_files(&manifest_path),
            Err(FomError::DimensionMismatch(_))
        ));
    }
}
