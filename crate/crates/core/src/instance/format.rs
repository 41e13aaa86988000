//! Extended-DAT instance files.
//!
//! ```text
//! # comment
//! NAME micro-a
//! VERTICES 4
//! CAPACITY 5
//! HORIZON 200
//! TYPE 3LP
//! SLOPE 0.5
//! FLEET 3                      (optional)
//! SERVICE_DURATION static      (optional: static | cost-coupled)
//! ARCS
//! tail head length travel_time travel_cost [REQ demand service_time min_sc bt et]
//! END
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::generate::{ClassicEdge, ClassicInstance};
use super::{ArcSpec, Instance, InstanceHeader, InstanceType, ServiceDuration, ServiceSpec};
use crate::error::{InstanceError, ParseError};
use crate::scalar::Scalar;

pub fn parse_instance<S: Scalar>(path: impl AsRef<Path>) -> Result<Instance<S>, ParseError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| ParseError::Syntax {
        line: 0,
        message: format!("{}: {e}", path.as_ref().display()),
    })?;
    parse_instance_str(&text)
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn number(line: usize, tok: Option<&str>, what: &str) -> Result<f64, ParseError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    let v: f64 = tok.parse().map_err(|_| syntax(line, format!("bad {what} `{tok}`")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{what} must be finite")));
    }
    Ok(v)
}

fn vertex(line: usize, tok: Option<&str>, n_vertices: usize) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| syntax(line, "missing vertex"))?;
    let v: usize = tok.parse().map_err(|_| syntax(line, format!("bad vertex `{tok}`")))?;
    if v >= n_vertices {
        return Err(ParseError::UnknownVertex { line, vertex: v, n_vertices });
    }
    Ok(v)
}

pub fn parse_instance_str<S: Scalar>(text: &str) -> Result<Instance<S>, ParseError> {
    let mut name = None;
    let mut n_vertices = None;
    let mut capacity = None;
    let mut horizon = None;
    let mut itype = None;
    let mut slope = None;
    let mut fleet = None;
    let mut duration = ServiceDuration::Static;
    let mut specs = Vec::new();
    let mut in_arcs = false;
    let mut ended = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if ended {
            return Err(syntax(line, "content after END"));
        }
        let mut toks = content.split_whitespace();
        let first = toks.next().unwrap_or_default();

        if in_arcs {
            if first == "END" {
                ended = true;
                continue;
            }
            let nv = n_vertices.ok_or(ParseError::MissingHeader("VERTICES"))?;
            let tail = vertex(line, Some(first), nv)?;
            let head = vertex(line, toks.next(), nv)?;
            let length = number(line, toks.next(), "length")?;
            let travel_time = number(line, toks.next(), "travel_time")?;
            let travel_cost = number(line, toks.next(), "travel_cost")?;
            let service = match toks.next() {
                None => None,
                Some("REQ") => {
                    let demand = number(line, toks.next(), "demand")?;
                    let service_time = number(line, toks.next(), "service_time")?;
                    let min_sc = number(line, toks.next(), "min_sc")?;
                    let bt = number(line, toks.next(), "bt")?;
                    let et = number(line, toks.next(), "et")?;
                    if bt > et {
                        return Err(ParseError::IntervalInverted { line, bt, et });
                    }
                    Some(ServiceSpec {
                        demand: S::c(demand),
                        service_time: S::c(service_time),
                        min_sc: S::c(min_sc),
                        bt: S::c(bt),
                        et: S::c(et),
                    })
                }
                Some(other) => return Err(syntax(line, format!("expected REQ, found `{other}`"))),
            };
            if let Some(extra) = toks.next() {
                return Err(syntax(line, format!("trailing token `{extra}`")));
            }
            if [length, travel_time, travel_cost].iter().any(|v| *v < 0.0) {
                return Err(syntax(line, "negative arc attribute"));
            }
            specs.push(ArcSpec {
                tail,
                head,
                length: S::c(length),
                travel_time: S::c(travel_time),
                travel_cost: S::c(travel_cost),
                service,
            });
            continue;
        }

        let value = toks.next();
        match first {
            "NAME" => {
                name = Some(value.ok_or_else(|| syntax(line, "missing name"))?.to_string());
            }
            "VERTICES" => {
                let tok = value.ok_or_else(|| syntax(line, "missing vertex count"))?;
                n_vertices =
                    Some(tok.parse().map_err(|_| syntax(line, format!("bad vertex count `{tok}`")))?);
            }
            "CAPACITY" => capacity = Some(number(line, value, "capacity")?),
            "HORIZON" => horizon = Some(number(line, value, "horizon")?),
            "SLOPE" => slope = Some(number(line, value, "slope")?),
            "TYPE" => {
                let tok = value.ok_or_else(|| syntax(line, "missing type"))?;
                itype = Some(tok.parse::<InstanceType>().map_err(|e| syntax(line, e))?);
            }
            "FLEET" => {
                let tok = value.ok_or_else(|| syntax(line, "missing fleet bound"))?;
                fleet = Some(tok.parse().map_err(|_| syntax(line, format!("bad fleet `{tok}`")))?);
            }
            "SERVICE_DURATION" => {
                duration = match value {
                    Some("static") => ServiceDuration::Static,
                    Some("cost-coupled") => ServiceDuration::CostCoupled,
                    other => {
                        return Err(syntax(line, format!("bad service duration {other:?}")));
                    }
                }
            }
            "ARCS" => in_arcs = true,
            other => {
                return Err(ParseError::UnknownField { line, field: other.to_string() });
            }
        }
        if !in_arcs {
            if let Some(extra) = toks.next() {
                return Err(syntax(line, format!("trailing token `{extra}`")));
            }
        }
    }

    if !ended {
        return Err(ParseError::MissingHeader("END"));
    }
    let header = InstanceHeader {
        name: name.ok_or(ParseError::MissingHeader("NAME"))?,
        n_vertices: n_vertices.ok_or(ParseError::MissingHeader("VERTICES"))?,
        capacity: S::c(capacity.ok_or(ParseError::MissingHeader("CAPACITY"))?),
        horizon: S::c(horizon.ok_or(ParseError::MissingHeader("HORIZON"))?),
        instance_type: itype.ok_or(ParseError::MissingHeader("TYPE"))?,
        slope_abs: S::c(slope.ok_or(ParseError::MissingHeader("SLOPE"))?),
    };
    let mut inst = Instance::new(header, specs)?;
    inst.fleet_bound = fleet;
    inst.service_duration = duration;
    Ok(inst)
}

/// Canonical text form of an instance.
pub fn write_instance<S: Scalar>(inst: &Instance<S>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", inst.name);
    let _ = writeln!(out, "VERTICES {}", inst.n_vertices);
    let _ = writeln!(out, "CAPACITY {}", inst.capacity.as_f64());
    let _ = writeln!(out, "HORIZON {}", inst.horizon.as_f64());
    let _ = writeln!(out, "TYPE {}", inst.instance_type);
    let _ = writeln!(out, "SLOPE {}", inst.slope_abs.as_f64());
    if let Some(m) = inst.fleet_bound {
        let _ = writeln!(out, "FLEET {m}");
    }
    if inst.service_duration == ServiceDuration::CostCoupled {
        let _ = writeln!(out, "SERVICE_DURATION cost-coupled");
    }
    out.push_str("ARCS\n");
    for a in &inst.arcs {
        let _ = write!(
            out,
            "{} {} {} {} {}",
            a.tail,
            a.head,
            a.length.as_f64(),
            a.travel_time.as_f64(),
            a.travel_cost.as_f64()
        );
        if let Some(s) = &a.service {
            let f = &s.cost_fn;
            let _ = write!(
                out,
                " REQ {} {} {} {} {}",
                s.demand.as_f64(),
                s.service_time.as_f64(),
                f.min_sc.as_f64(),
                f.bt.as_f64(),
                f.et.as_f64()
            );
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

/// Reads a classic undirected gdb/egl DAT file.
///
/// Vertices are renumbered from 1-based to 0-based, with the depot moved to
/// vertex 0.
pub fn parse_classic_dat(text: &str) -> Result<ClassicInstance, ParseError> {
    let mut name = None;
    let mut n_vertices = None;
    let mut capacity = None;
    let mut depot = 1usize;
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('(') {
            let close = content.find(')').ok_or_else(|| syntax(line, "unclosed edge tuple"))?;
            let mut ends = content[1..close].split(',').map(|t| t.trim().parse::<usize>());
            let (Some(Ok(u)), Some(Ok(v))) = (ends.next(), ends.next()) else {
                return Err(syntax(line, "bad edge tuple"));
            };
            let mut cost = None;
            let mut demand = 0.0;
            let mut toks = content[close + 1..].split_whitespace();
            while let Some(tok) = toks.next() {
                match tok.to_ascii_lowercase().as_str() {
                    "coste" => cost = Some(number(line, toks.next(), "coste")?),
                    "demanda" => demand = number(line, toks.next(), "demanda")?,
                    _ => {}
                }
            }
            let cost = cost.ok_or_else(|| syntax(line, "edge without coste"))?;
            edges.push(ClassicEdge { u, v, cost, demand });
            continue;
        }
        let Some((key, value)) = content.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "NOMBRE" => name = Some(value.to_string()),
            "VERTICES" => {
                n_vertices = Some(value.parse().map_err(|_| syntax(line, "bad VERTICES"))?);
            }
            "CAPACIDAD" => capacity = Some(number(line, Some(value), "CAPACIDAD")?),
            "DEPOSITO" => depot = value.parse().map_err(|_| syntax(line, "bad DEPOSITO"))?,
            _ => {}
        }
    }

    let n_vertices: usize = n_vertices.ok_or(ParseError::MissingHeader("VERTICES"))?;
    if depot == 0 || depot > n_vertices {
        return Err(ParseError::Invalid(InstanceError::Generator(format!("depot {depot} out of range"))));
    }
    let relabel = |v: usize| {
        let v0 = v - 1;
        if v0 == depot - 1 {
            0
        } else if v0 == 0 {
            depot - 1
        } else {
            v0
        }
    };
    let mut mapped = Vec::with_capacity(edges.len());
    for e in edges {
        if e.u == 0 || e.v == 0 || e.u > n_vertices || e.v > n_vertices {
            return Err(ParseError::UnknownVertex { line: 0, vertex: e.u.max(e.v), n_vertices });
        }
        mapped.push(ClassicEdge { u: relabel(e.u), v: relabel(e.v), ..e });
    }
    Ok(ClassicInstance {
        name: name.ok_or(ParseError::MissingHeader("NOMBRE"))?,
        n_vertices,
        capacity: capacity.ok_or(ParseError::MissingHeader("CAPACIDAD"))?,
        edges: mapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
NAME tiny
VERTICES 2
CAPACITY 5
HORIZON 100
TYPE 2LP
SLOPE 1
ARCS
0 1 3 3 3 REQ 1 3 3 0 50
1 0 3 3 3
END
";

    #[test]
    fn minimal_file_has_one_task() {
        let inst: Instance<f64> = parse_instance_str(MINIMAL).unwrap();
        assert_eq!(inst.n_tasks(), 1);
        assert_eq!(inst.capacity, 5.0);
        assert!(inst.is_reversible(0));
    }

    #[test]
    fn inverted_interval_is_reported_with_line() {
        let text = MINIMAL.replace("REQ 1 3 3 0 50", "REQ 1 3 3 40 30").replace("2LP", "3LP");
        let err = parse_instance_str::<f64>(&text).unwrap_err();
        assert_eq!(err, ParseError::IntervalInverted { line: 8, bt: 40.0, et: 30.0 });
        assert!(err.to_string().contains("interval inverted"));
    }

    #[test]
    fn unknown_field_and_vertex_errors() {
        let text = MINIMAL.replace("SLOPE 1", "SLOPE 1\nCOLOUR red");
        assert_eq!(
            parse_instance_str::<f64>(&text).unwrap_err(),
            ParseError::UnknownField { line: 7, field: "COLOUR".into() }
        );
        let text = MINIMAL.replace("1 0 3 3 3\n", "1 7 3 3 3\n");
        assert!(matches!(
            parse_instance_str::<f64>(&text).unwrap_err(),
            ParseError::UnknownVertex { line: 9, vertex: 7, .. }
        ));
    }

    #[test]
    fn missing_header_is_reported() {
        let text = MINIMAL.replace("CAPACITY 5\n", "");
        assert_eq!(parse_instance_str::<f64>(&text).unwrap_err(), ParseError::MissingHeader("CAPACITY"));
    }

    #[test]
    fn comments_and_optional_headers_round_trip() {
        let text = MINIMAL
            .replace("SLOPE 1", "SLOPE 1 # global slope\nFLEET 2\nSERVICE_DURATION cost-coupled");
        let inst: Instance<f64> = parse_instance_str(&text).unwrap();
        assert_eq!(inst.fleet_bound, Some(2));
        assert_eq!(inst.service_duration, ServiceDuration::CostCoupled);
        let canon = write_instance(&inst);
        let again: Instance<f64> = parse_instance_str(&canon).unwrap();
        assert_eq!(again, inst);
        assert_eq!(write_instance(&again), canon);
    }

    #[test]
    fn classic_dat_depot_moves_to_zero() {
        let text = "\
NOMBRE : toy
VERTICES : 3
CAPACIDAD : 5
LISTA_ARISTAS_REQ :
( 1, 2)   coste 4   demanda 1
( 2, 3)   coste 6   demanda 2
LISTA_ARISTAS_NOREQ :
( 1, 3)   coste 1
DEPOSITO :   2
";
        let c = parse_classic_dat(text).unwrap();
        assert_eq!(c.n_vertices, 3);
        assert_eq!((c.edges[0].u, c.edges[0].v), (1, 0));
        assert_eq!((c.edges[1].u, c.edges[1].v), (0, 2));
        assert_eq!(c.edges[2].demand, 0.0);
    }
}
