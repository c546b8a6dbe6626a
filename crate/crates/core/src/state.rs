use crate::mesh::Mesh;

/// All unknowns of the coupled problem at one time instant.
///
/// Nodal fields are indexed by mesh node; transport and damage fields are
/// zero on nodes that belong to the steel only. `history` holds the crack
/// driving force at the three quadrature points of each concrete element.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub time: f64,
    /// Free chloride concentration (mol/m3 of pore solution).
    pub c_free: Vec<f64>,
    /// Bound chloride concentration (mol/m3 of pore solution).
    pub c_bound: Vec<f64>,
    /// Ferrous ion concentration (mol/m3).
    pub c_ferrous: Vec<f64>,
    /// Ferric ion concentration (mol/m3).
    pub c_ferric: Vec<f64>,
    /// Precipitate volume fraction.
    pub theta_p: Vec<f64>,
    /// Displacements, interleaved (x, y) per node (m).
    pub displacement: Vec<f64>,
    pub phase: Vec<f64>,
    pub history: Vec<[f64; 3]>,
    /// Liquid fraction used for chloride storage in the last chloride solve.
    pub theta_l_chloride: Vec<f64>,
}

impl FieldState {
    pub fn new(mesh: &Mesh, porosity: f64, concrete_elements: usize, history_floor: f64) -> Self {
        let n = mesh.num_nodes();
        FieldState {
            time: 0.0,
            c_free: vec![0.0; n],
            c_bound: vec![0.0; n],
            c_ferrous: vec![0.0; n],
            c_ferric: vec![0.0; n],
            theta_p: vec![0.0; n],
            displacement: vec![0.0; 2 * n],
            phase: vec![0.0; n],
            history: vec![[history_floor; 3]; concrete_elements],
            theta_l_chloride: vec![porosity; n],
        }
    }

    /// Precipitate saturation ratio θp / p0 per node.
    pub fn saturation(&self, porosity: f64) -> Vec<f64> {
        self.theta_p.iter().map(|t| t / porosity).collect()
    }

    /// First non-finite value, reported as (field name, index).
    pub fn find_non_finite(&self) -> Option<(&'static str, usize)> {
        let fields: [(&'static str, &[f64]); 8] = [
            ("c_f", &self.c_free),
            ("c_b", &self.c_bound),
            ("c_II", &self.c_ferrous),
            ("c_III", &self.c_ferric),
            ("theta_p", &self.theta_p),
            ("u", &self.displacement),
            ("phi", &self.phase),
            ("theta_l", &self.theta_l_chloride),
        ];
        fields
            .iter()
            .find_map(|(name, v)| v.iter().position(|x| !x.is_finite()).map(|i| (*name, i)))
    }
}
