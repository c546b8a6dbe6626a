//! Gmsh MSH 2.2 ASCII reader.

use std::collections::{BTreeMap, HashMap};

use super::{signed_area, BoundarySets, Edge, Mesh, MeshError, Subdomain};

const LINE: u32 = 1;
const TRIANGLE: u32 = 2;
const POINT: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Concrete,
    Steel,
    Exposed,
    Sealed,
    Interface,
    Upper,
}

impl Group {
    fn from_name(name: &str) -> Option<Group> {
        Some(match name {
            "concrete" => Group::Concrete,
            "steel" => Group::Steel,
            "gamma_cc" => Group::Exposed,
            "gamma_cf" => Group::Sealed,
            "gamma_s" => Group::Interface,
            "gamma_us" => Group::Upper,
            _ => return None,
        })
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, MeshError> {
        for (i, line) in self.inner.by_ref() {
            self.current = i + 1;
            let line = line.trim();
            if !line.is_empty() {
                return Ok(line);
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn err(&self, message: impl Into<String>) -> MeshError {
        MeshError::Parse {
            line: self.current,
            message: message.into(),
        }
    }

    fn expect(&mut self, header: &str) -> Result<(), MeshError> {
        let line = self.next()?;
        if line != header {
            return Err(self.err(format!("expected {header}, found {line:?}")));
        }
        Ok(())
    }

    fn count(&mut self) -> Result<usize, MeshError> {
        let line = self.next()?;
        line.parse().map_err(|_| self.err(format!("expected a count, found {line:?}")))
    }
}

fn parse_num<T: std::str::FromStr>(lines: &Lines, tok: Option<&str>) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| lines.err("missing field"))?;
    tok.parse().map_err(|_| lines.err(format!("cannot parse {tok:?}")))
}

/// Parse a Gmsh 2.2 ASCII mesh whose physical groups are named `concrete`,
/// `steel`, `gamma_cc`, `gamma_cf`, `gamma_s` and `gamma_us`.
///
/// Point elements are ignored. Nodes not referenced by any triangle are
/// dropped, clockwise triangles are reoriented, and the result is validated.
pub fn read_msh(bytes: &[u8]) -> Result<Mesh, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MeshError::Parse {
        line: 0,
        message: format!("not UTF-8 text: {e}"),
    })?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        current: 0,
    };

    let mut names: HashMap<i64, Group> = HashMap::new();
    let mut raw_nodes: BTreeMap<i64, [f64; 2]> = BTreeMap::new();
    let mut seen_nodes = false;
    let mut seen_format = false;
    let mut tris: Vec<([i64; 3], Group)> = Vec::new();
    let mut segs: Vec<([i64; 2], Group)> = Vec::new();
    let mut pending: Vec<(usize, u32, i64, Vec<i64>)> = Vec::new();

    loop {
        let header = match lines.next() {
            Ok(h) => h,
            Err(_) if seen_format => break,
            Err(e) => return Err(e),
        };
        match header {
            "$MeshFormat" => {
                let line = lines.next()?;
                let mut it = line.split_whitespace();
                let version = it.next().unwrap_or("");
                let file_type = it.next().unwrap_or("");
                if !version.starts_with("2.2") || file_type != "0" {
                    return Err(lines.err(format!("only ASCII MSH 2.2 is supported, found {line:?}")));
                }
                lines.expect("$EndMeshFormat")?;
                seen_format = true;
            }
            "$PhysicalNames" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let line = lines.next()?;
                    let mut it = line.splitn(3, char::is_whitespace);
                    let _dim: i64 = parse_num(&lines, it.next())?;
                    let tag: i64 = parse_num(&lines, it.next())?;
                    let name = it.next().ok_or_else(|| lines.err("missing physical name"))?;
                    let name = name.trim().trim_matches('"');
                    if let Some(g) = Group::from_name(name) {
                        names.insert(tag, g);
                    }
                }
                lines.expect("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let line = lines.next()?;
                    let mut it = line.split_whitespace();
                    let id: i64 = parse_num(&lines, it.next())?;
                    let x: f64 = parse_num(&lines, it.next())?;
                    let y: f64 = parse_num(&lines, it.next())?;
                    if raw_nodes.insert(id, [x, y]).is_some() {
                        return Err(lines.err(format!("duplicate node id {id}")));
                    }
                }
                lines.expect("$EndNodes")?;
                seen_nodes = true;
            }
            "$Elements" => {
                let n = lines.count()?;
                for _ in 0..n {
                    let line = lines.next()?;
                    let mut it = line.split_whitespace();
                    let _id: i64 = parse_num(&lines, it.next())?;
                    let kind: u32 = parse_num(&lines, it.next())?;
                    let ntags: usize = parse_num(&lines, it.next())?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(parse_num::<i64>(&lines, it.next())?);
                    }
                    let nodes = it
                        .map(|t| t.parse::<i64>().map_err(|_| lines.err(format!("cannot parse {t:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    let expected = match kind {
                        LINE => 2,
                        TRIANGLE => 3,
                        POINT => continue,
                        other => return Err(lines.err(format!("unsupported element type {other}"))),
                    };
                    if nodes.len() != expected {
                        return Err(lines.err(format!("element type {kind} needs {expected} nodes")));
                    }
                    let physical = *tags.first().ok_or_else(|| lines.err("element without physical tag"))?;
                    pending.push((lines.current, kind, physical, nodes));
                }
                lines.expect("$EndElements")?;
            }
            other if other.starts_with("$End") => {
                return Err(lines.err(format!("unmatched section terminator {other}")));
            }
            other if other.starts_with('$') => {
                // skip unknown sections
                let end = format!("$End{}", &other[1..]);
                while lines.next()? != end {}
            }
            other => return Err(lines.err(format!("expected a section header, found {other:?}"))),
        }
    }

    if !seen_nodes {
        return Err(MeshError::Parse {
            line: lines.current,
            message: "missing $Nodes section".into(),
        });
    }
    for (line, kind, physical, nodes) in pending {
        let group = *names.get(&physical).ok_or_else(|| MeshError::Parse {
            line,
            message: format!("physical tag {physical} has no recognised name"),
        })?;
        if kind == TRIANGLE {
            if !matches!(group, Group::Concrete | Group::Steel) {
                return Err(MeshError::Parse {
                    line,
                    message: "triangles must belong to 'concrete' or 'steel'".into(),
                });
            }
            tris.push(([nodes[0], nodes[1], nodes[2]], group));
        } else {
            if matches!(group, Group::Concrete | Group::Steel) {
                return Err(MeshError::Parse {
                    line,
                    message: "line elements must belong to a boundary group".into(),
                });
            }
            segs.push(([nodes[0], nodes[1]], group));
        }
    }
    let end = lines.current;
    let missing = |what: &str| MeshError::Parse {
        line: end,
        message: format!("missing required physical group {what}"),
    };
    if !tris.iter().any(|t| t.1 == Group::Concrete) {
        return Err(missing("'concrete'"));
    }
    if !segs.iter().any(|s| matches!(s.1, Group::Exposed | Group::Sealed)) {
        return Err(missing("'gamma_cc' or 'gamma_cf'"));
    }

    // compact node numbering to the nodes used by triangles
    let mut index: BTreeMap<i64, usize> = BTreeMap::new();
    for (t, _) in &tris {
        for id in t {
            if !raw_nodes.contains_key(id) {
                return Err(MeshError::Parse {
                    line: end,
                    message: format!("triangle references undefined node {id}"),
                });
            }
            index.insert(*id, 0);
        }
    }
    let mut nodes = Vec::with_capacity(index.len());
    for (k, (id, slot)) in index.iter_mut().enumerate() {
        *slot = k;
        nodes.push(raw_nodes[id]);
    }
    let mut triangles = Vec::with_capacity(tris.len());
    let mut subdomains = Vec::with_capacity(tris.len());
    for (t, g) in &tris {
        let [a, b, c] = t.map(|id| index[&id]);
        let tri = if signed_area(nodes[a], nodes[b], nodes[c]) < 0.0 { [a, c, b] } else { [a, b, c] };
        triangles.push(tri);
        subdomains.push(if *g == Group::Steel { Subdomain::Steel } else { Subdomain::Concrete });
    }
    let mut boundaries = BoundarySets::default();
    for (s, g) in &segs {
        let edge: Edge = match (index.get(&s[0]), index.get(&s[1])) {
            (Some(&a), Some(&b)) => [a, b],
            _ => {
                return Err(MeshError::Parse {
                    line: end,
                    message: format!("boundary edge ({}, {}) is not on any triangle", s[0], s[1]),
                })
            }
        };
        match g {
            Group::Exposed => boundaries.chloride_exposed.push(edge),
            Group::Sealed => boundaries.sealed.push(edge),
            Group::Interface => boundaries.steel_interface.push(edge),
            Group::Upper => boundaries.upper_surface.push(edge),
            Group::Concrete | Group::Steel => unreachable!(),
        }
    }
    let mesh = Mesh {
        nodes,
        triangles,
        subdomains,
        boundaries,
        sides: BTreeMap::new(),
    };
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 2 \"gamma_cf\"
2 1 \"concrete\"
$EndPhysicalNames
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
4
1 2 2 1 1 1 3 2
2 1 2 2 1 1 2
3 1 2 2 1 2 3
4 1 2 2 1 3 1
$EndElements
";

    #[test]
    fn reads_single_triangle() {
        let mesh = read_msh(MINIMAL.as_bytes()).unwrap();
        assert_eq!(mesh.num_triangles(), 1);
        assert_eq!(mesh.num_nodes(), 3);
        assert_eq!(mesh.boundaries.sealed.len(), 3);
        // the clockwise input triangle was reoriented
        assert!(mesh.triangle_area(0) > 0.0);
    }

    #[test]
    fn rejects_quadrilateral() {
        let text = MINIMAL.replace("1 2 2 1 1 1 3 2", "1 3 2 1 1 1 2 3 3");
        let err = read_msh(text.as_bytes()).unwrap_err();
        match err {
            MeshError::Parse { line, message } => {
                assert!(message.contains("unsupported element type"));
                assert_eq!(line, 17);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_nodes() {
        let start = MINIMAL.find("$Nodes").unwrap();
        let end = MINIMAL.find("$Elements").unwrap();
        let text = format!("{}{}", &MINIMAL[..start], &MINIMAL[end..]);
        assert!(matches!(read_msh(text.as_bytes()), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn rejects_missing_concrete_group() {
        let text = MINIMAL.replace("\"concrete\"", "\"steel\"");
        assert!(read_msh(text.as_bytes()).is_err());
    }

    #[test]
    fn ignores_point_elements() {
        let text = MINIMAL.replace("$Elements\n4\n", "$Elements\n5\n5 15 2 2 1 1\n");
        assert!(read_msh(text.as_bytes()).is_ok());
    }
}
