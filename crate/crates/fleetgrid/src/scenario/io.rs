//! Scenario directory format.
//!
//! A scenario is a directory holding `manifest.txt` (key = value text with
//! `n_days`, `dt_hours`, `rho_disc`, `eta_trans` and optional synthesis and
//! split keys) plus one delimited table per parameter group:
//! `dimensions.csv`, `fleet.csv`, `chargers.csv`, `demand.csv`, `grid.csv`,
//! `exogenous_loads.csv`. Column names are the model symbols romanised
//! (`eta_b`, `psi_chdd`, ...); power in kW, energy in kWh, money in USD,
//! distance in miles.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every value bit for bit.

use super::split::SplitInfo;
use super::types::*;
use crate::error::LoadError;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const MANIFEST: &str = "manifest.txt";

pub fn load_scenario(dir: &Path) -> Result<ScenarioSpec, LoadError> {
    let manifest = Manifest::read(&dir.join(MANIFEST))?;
    let dims_file = TableFile::read(dir, "dimensions.csv")?;
    let dims = load_dimensions(&dims_file, &manifest)?;
    let lookup = NameLookup::new(&dims);

    let fleet = load_fleet(&TableFile::read(dir, "fleet.csv")?, &dims, &lookup)?;
    let chargers = load_chargers(&TableFile::read(dir, "chargers.csv")?, &dims, &lookup)?;
    let demand = load_demand(&TableFile::read(dir, "demand.csv")?, &dims, &lookup)?;
    let grid = load_grid(&TableFile::read(dir, "grid.csv")?, &dims, &lookup, &manifest)?;
    let exogenous = load_exogenous(&TableFile::read(dir, "exogenous_loads.csv")?, &dims, &lookup)?;

    Ok(ScenarioSpec {
        dims,
        fleet,
        chargers,
        demand,
        exogenous,
        grid,
        synthesis: manifest.synthesis(),
        split: manifest.split()?,
    })
}

pub fn save_scenario(spec: &ScenarioSpec, dir: &Path) -> Result<(), LoadError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_manifest(spec, &dir.join(MANIFEST))?;
    write_file(dir, "dimensions.csv", dimensions_csv(spec))?;
    write_file(dir, "fleet.csv", fleet_csv(spec))?;
    write_file(dir, "chargers.csv", chargers_csv(spec))?;
    write_file(dir, "demand.csv", demand_csv(spec))?;
    write_file(dir, "grid.csv", grid_csv(spec))?;
    write_file(dir, "exogenous_loads.csv", exogenous_csv(spec))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Manifest

struct Manifest {
    keys: HashMap<String, String>,
}

impl Manifest {
    fn read(path: &Path) -> Result<Self, LoadError> {
        let text = fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                LoadError::MissingFile { path: path.to_path_buf() }
            } else {
                io_err(path, e)
            }
        })?;
        let mut keys = HashMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(LoadError::Manifest(format!("line {}: expected key = value, got `{line}`", ln + 1)));
            };
            keys.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Manifest { keys })
    }

    fn required(&self, key: &str) -> Result<f64, LoadError> {
        let raw = self
            .keys
            .get(key)
            .ok_or_else(|| LoadError::Manifest(format!("missing key `{key}`")))?;
        raw.parse()
            .map_err(|_| LoadError::Manifest(format!("key `{key}`: cannot parse `{raw}` as a number")))
    }

    fn optional(&self, key: &str) -> Result<Option<f64>, LoadError> {
        match self.keys.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| LoadError::Manifest(format!("key `{key}`: cannot parse `{raw}` as a number"))),
        }
    }

    fn synthesis(&self) -> SynthesisConfig {
        let mut cfg = SynthesisConfig::default();
        if let Ok(Some(v)) = self.optional("automated_share") {
            cfg.automated_share = v;
        }
        if let Ok(Some(v)) = self.optional("plug_start_hour") {
            cfg.plug_start_hour = v;
        }
        if let Ok(Some(v)) = self.optional("plug_end_hour") {
            cfg.plug_end_hour = v;
        }
        cfg
    }

    fn split(&self) -> Result<Option<SplitInfo>, LoadError> {
        match self.optional("split_s")? {
            None => Ok(None),
            Some(s) => Ok(Some(SplitInfo {
                shared_fraction: s,
                automated_share: self.required("split_automated_share")?,
                shared_trip_miles: self.required("split_shared_trip_miles")?,
                private_auto_trip_miles: self.required("split_private_auto_trip_miles")?,
                private_human_trip_miles: self.required("split_private_human_trip_miles")?,
            })),
        }
    }
}

fn write_manifest(spec: &ScenarioSpec, path: &Path) -> Result<(), LoadError> {
    let mut out = String::new();
    let _ = writeln!(out, "n_days = {}", spec.grid.horizon_days);
    let _ = writeln!(out, "dt_hours = {}", spec.dims.dt_hours);
    let _ = writeln!(out, "rho_disc = {}", spec.grid.discount_per_day);
    let _ = writeln!(out, "eta_trans = {}", spec.grid.eta_trans);
    let _ = writeln!(out, "automated_share = {}", spec.synthesis.automated_share);
    let _ = writeln!(out, "plug_start_hour = {}", spec.synthesis.plug_start_hour);
    let _ = writeln!(out, "plug_end_hour = {}", spec.synthesis.plug_end_hour);
    if let Some(split) = &spec.split {
        let _ = writeln!(out, "split_s = {}", split.shared_fraction);
        let _ = writeln!(out, "split_automated_share = {}", split.automated_share);
        let _ = writeln!(out, "split_shared_trip_miles = {}", split.shared_trip_miles);
        let _ = writeln!(out, "split_private_auto_trip_miles = {}", split.private_auto_trip_miles);
        let _ = writeln!(out, "split_private_human_trip_miles = {}", split.private_human_trip_miles);
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// CSV plumbing

struct TableFile {
    name: String,
    header: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl TableFile {
    fn read(dir: &Path, name: &str) -> Result<Self, LoadError> {
        let path = dir.join(name);
        if !path.exists() {
            return Err(LoadError::MissingFile { path });
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(false)
            .from_path(&path)
            .map_err(|e| csv_err(&path, e))?;
        let header = reader
            .headers()
            .map_err(|e| csv_err(&path, e))?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            rows.push(rec.map_err(|e| csv_err(&path, e))?);
        }
        Ok(TableFile { name: name.to_string(), header, rows })
    }

    fn col(&self, name: &str) -> Result<usize, LoadError> {
        self.header.get(name).copied().ok_or_else(|| LoadError::BadTable {
            file: self.name.clone(),
            message: format!("missing column `{name}`"),
        })
    }

    fn text(&self, row: usize, col: usize) -> &str {
        self.rows[row].get(col).unwrap_or("")
    }

    fn number(&self, row: usize, col: usize) -> Result<f64, LoadError> {
        let raw = self.text(row, col);
        raw.parse().map_err(|_| LoadError::BadRecord {
            file: self.name.clone(),
            row: row + 2,
            message: format!("cannot parse `{raw}` as a number"),
        })
    }

    fn number_or(&self, row: usize, col: usize, default: f64) -> Result<f64, LoadError> {
        let raw = self.text(row, col);
        if raw.is_empty() {
            Ok(default)
        } else {
            raw.parse().map_err(|_| LoadError::BadRecord {
                file: self.name.clone(),
                row: row + 2,
                message: format!("cannot parse `{raw}` as a number"),
            })
        }
    }

    fn bad(&self, row: usize, message: String) -> LoadError {
        LoadError::BadRecord { file: self.name.clone(), row: row + 2, message }
    }
}

/// Name → index maps for the dimension sets.
struct NameLookup {
    mobility: HashMap<String, usize>,
    grid: HashMap<String, usize>,
    batteries: [HashMap<String, usize>; 2],
    levels: [HashMap<String, usize>; 2],
    bins: [HashMap<String, usize>; 2],
    generators: HashMap<String, usize>,
}

fn index_of(names: &[String]) -> HashMap<String, usize> {
    names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect()
}

impl NameLookup {
    fn new(dims: &DimensionSets) -> Self {
        NameLookup {
            mobility: index_of(&dims.mobility_regions),
            grid: index_of(&dims.grid_regions),
            batteries: [index_of(&dims.ldv_batteries), index_of(&dims.hdv_batteries)],
            levels: [index_of(&dims.ldv_levels), index_of(&dims.hdv_levels)],
            bins: [index_of(&dims.ldv_bins), index_of(&dims.hdv_bins)],
            generators: index_of(&dims.generators),
        }
    }

    fn class_slot(class: VehicleClass) -> usize {
        match class {
            VehicleClass::Ldv => 0,
            VehicleClass::Hdv => 1,
        }
    }
}

fn parse_class(file: &TableFile, row: usize, raw: &str) -> Result<VehicleClass, LoadError> {
    match raw {
        "ldv" => Ok(VehicleClass::Ldv),
        "hdv" => Ok(VehicleClass::Hdv),
        other => Err(file.bad(row, format!("unknown class `{other}` (expected ldv or hdv)"))),
    }
}

fn resolve(
    file: &TableFile,
    row: usize,
    map: &HashMap<String, usize>,
    kind: &str,
    raw: &str,
) -> Result<usize, LoadError> {
    map.get(raw)
        .copied()
        .ok_or_else(|| file.bad(row, format!("unknown {kind} `{raw}`")))
}

// ---------------------------------------------------------------------------
// dimensions.csv

fn load_dimensions(file: &TableFile, manifest: &Manifest) -> Result<DimensionSets, LoadError> {
    let kind_col = file.col("kind")?;
    let name_col = file.col("name")?;
    let grid_col = file.col("grid_region")?;

    let n_days = manifest.required("n_days")?;
    let dt = manifest.required("dt_hours")?;
    if !(dt > 0.0) {
        return Err(LoadError::Manifest(format!("dt_hours = {dt} must be > 0")));
    }
    let hours = n_days * 24.0 / dt;
    let n_hours = hours.round() as usize;
    if (hours - n_hours as f64).abs() > 1e-9 * hours.max(1.0) {
        return Err(LoadError::Manifest(format!(
            "n_days = {n_days} at dt_hours = {dt} gives a non-integer step count {hours}"
        )));
    }

    let mut dims = DimensionSets {
        n_hours,
        dt_hours: dt,
        mobility_regions: Vec::new(),
        grid_regions: Vec::new(),
        region_map: Vec::new(),
        ldv_batteries: Vec::new(),
        hdv_batteries: Vec::new(),
        ldv_levels: Vec::new(),
        hdv_levels: Vec::new(),
        ldv_bins: Vec::new(),
        hdv_bins: Vec::new(),
        generators: Vec::new(),
    };
    // Mobility rows may precede their grid region declaration; resolve after.
    let mut pending_map: Vec<(usize, String)> = Vec::new();

    for row in 0..file.rows.len() {
        let kind = file.text(row, kind_col);
        let name = file.text(row, name_col).to_string();
        match kind {
            "mobility_region" => {
                let grid_name = file.text(row, grid_col).to_string();
                if grid_name.is_empty() {
                    return Err(file.bad(row, format!("mobility region `{name}` has no grid_region")));
                }
                pending_map.push((dims.mobility_regions.len(), grid_name));
                dims.mobility_regions.push(name);
            }
            "grid_region" => dims.grid_regions.push(name),
            "ldv_battery" => dims.ldv_batteries.push(name),
            "hdv_battery" => dims.hdv_batteries.push(name),
            "ldv_charger" => dims.ldv_levels.push(name),
            "hdv_charger" => dims.hdv_levels.push(name),
            "ldv_distance" => dims.ldv_bins.push(name),
            "hdv_distance" => dims.hdv_bins.push(name),
            "generator" => dims.generators.push(name),
            other => return Err(file.bad(row, format!("unknown dimension kind `{other}`"))),
        }
    }

    let grid_lookup = index_of(&dims.grid_regions);
    dims.region_map = vec![0; dims.mobility_regions.len()];
    for (r, grid_name) in pending_map {
        let i = grid_lookup.get(&grid_name).copied().ok_or_else(|| LoadError::BadTable {
            file: file.name.clone(),
            message: format!(
                "mobility region `{}` maps to undeclared grid region `{grid_name}`",
                dims.mobility_regions[r]
            ),
        })?;
        dims.region_map[r] = i;
    }
    Ok(dims)
}

fn dimensions_csv(spec: &ScenarioSpec) -> String {
    let d = &spec.dims;
    let mut out = String::from("kind,name,grid_region\n");
    for (r, name) in d.mobility_regions.iter().enumerate() {
        let _ = writeln!(out, "mobility_region,{name},{}", d.grid_regions[d.region_map[r]]);
    }
    for name in &d.grid_regions {
        let _ = writeln!(out, "grid_region,{name},");
    }
    for (kind, names) in [
        ("ldv_battery", &d.ldv_batteries),
        ("hdv_battery", &d.hdv_batteries),
        ("ldv_charger", &d.ldv_levels),
        ("hdv_charger", &d.hdv_levels),
        ("ldv_distance", &d.ldv_bins),
        ("hdv_distance", &d.hdv_bins),
        ("generator", &d.generators),
    ] {
        for name in names {
            let _ = writeln!(out, "{kind},{name},");
        }
    }
    out
}

// ---------------------------------------------------------------------------
// fleet.csv: class,b,r,B,eta_b,beta_v,phi_v,phi_om_v,L_v,phi_b,L_b,psi_f,psi_b

struct Fill<T> {
    values: Vec<Option<T>>,
}

impl<T: Copy + PartialEq> Fill<T> {
    fn new(len: usize) -> Self {
        Fill { values: vec![None; len] }
    }

    /// Sets a cell, rejecting conflicting duplicates.
    fn set(&mut self, idx: usize, v: T) -> Result<(), &'static str> {
        match self.values[idx] {
            None => {
                self.values[idx] = Some(v);
                Ok(())
            }
            Some(old) if old == v => Ok(()),
            Some(_) => Err("conflicting duplicate value"),
        }
    }

    fn finish(self, file: &TableFile, what: &str) -> Result<Vec<T>, LoadError> {
        let mut out = Vec::with_capacity(self.values.len());
        for (i, v) in self.values.into_iter().enumerate() {
            out.push(v.ok_or_else(|| LoadError::BadTable {
                file: file.name.clone(),
                message: format!("{what}: missing entry {i}"),
            })?);
        }
        Ok(out)
    }
}

fn load_fleet(file: &TableFile, dims: &DimensionSets, lookup: &NameLookup) -> Result<FleetParams, LoadError> {
    let cols: Vec<usize> = ["class", "b", "r", "B", "eta_b", "beta_v", "phi_v", "phi_om_v", "L_v", "phi_b", "L_b", "psi_f", "psi_b"]
        .iter()
        .map(|c| file.col(c))
        .collect::<Result<_, _>>()?;

    let mut out: [Option<ClassFleetBuilder>; 2] = [
        Some(ClassFleetBuilder::new(dims.ldv_batteries.len(), dims.n_regions())),
        Some(ClassFleetBuilder::new(dims.hdv_batteries.len(), dims.n_regions())),
    ];

    for row in 0..file.rows.len() {
        let class = parse_class(file, row, file.text(row, cols[0]))?;
        let slot = NameLookup::class_slot(class);
        let b = resolve(file, row, &lookup.batteries[slot], "battery", file.text(row, cols[1]))?;
        let r = resolve(file, row, &lookup.mobility, "mobility region", file.text(row, cols[2]))?;
        let builder = out[slot].as_mut().unwrap();
        let set = |fill: &mut Fill<f64>, idx: usize, v: f64| -> Result<(), LoadError> {
            fill.set(idx, v).map_err(|m| file.bad(row, m.to_string()))
        };
        set(&mut builder.battery_kwh, b, file.number(row, cols[3])?)?;
        set(&mut builder.efficiency, b, file.number(row, cols[4])?)?;
        set(&mut builder.maintenance, 0, file.number(row, cols[5])?)?;
        set(&mut builder.vehicle_capital, 0, file.number(row, cols[6])?)?;
        set(&mut builder.vehicle_om, 0, file.number(row, cols[7])?)?;
        set(&mut builder.vehicle_life, 0, file.number(row, cols[8])?)?;
        set(&mut builder.battery_capital, 0, file.number(row, cols[9])?)?;
        set(&mut builder.battery_life, 0, file.number(row, cols[10])?)?;
        set(&mut builder.fleet_mismatch, r, file.number(row, cols[11])?)?;
        set(&mut builder.battery_mismatch, r, file.number(row, cols[12])?)?;
    }

    Ok(FleetParams {
        ldv: out[0].take().unwrap().finish(file, "ldv")?,
        hdv: out[1].take().unwrap().finish(file, "hdv")?,
    })
}

struct ClassFleetBuilder {
    battery_kwh: Fill<f64>,
    efficiency: Fill<f64>,
    maintenance: Fill<f64>,
    vehicle_capital: Fill<f64>,
    vehicle_om: Fill<f64>,
    vehicle_life: Fill<f64>,
    battery_capital: Fill<f64>,
    battery_life: Fill<f64>,
    fleet_mismatch: Fill<f64>,
    battery_mismatch: Fill<f64>,
}

impl ClassFleetBuilder {
    fn new(n_batteries: usize, n_regions: usize) -> Self {
        ClassFleetBuilder {
            battery_kwh: Fill::new(n_batteries),
            efficiency: Fill::new(n_batteries),
            maintenance: Fill::new(1),
            vehicle_capital: Fill::new(1),
            vehicle_om: Fill::new(1),
            vehicle_life: Fill::new(1),
            battery_capital: Fill::new(1),
            battery_life: Fill::new(1),
            fleet_mismatch: Fill::new(n_regions),
            battery_mismatch: Fill::new(n_regions),
        }
    }

    fn finish(self, file: &TableFile, tag: &str) -> Result<ClassFleet, LoadError> {
        Ok(ClassFleet {
            battery_kwh: self.battery_kwh.finish(file, &format!("{tag} B"))?,
            efficiency_kwh_per_mile: self.efficiency.finish(file, &format!("{tag} eta_b"))?,
            maintenance_per_mile: self.maintenance.finish(file, &format!("{tag} beta_v"))?[0],
            vehicle_capital: self.vehicle_capital.finish(file, &format!("{tag} phi_v"))?[0],
            vehicle_om_per_day: self.vehicle_om.finish(file, &format!("{tag} phi_om_v"))?[0],
            vehicle_life_days: self.vehicle_life.finish(file, &format!("{tag} L_v"))?[0],
            battery_capital_per_kwh: self.battery_capital.finish(file, &format!("{tag} phi_b"))?[0],
            battery_life_days: self.battery_life.finish(file, &format!("{tag} L_b"))?[0],
            fleet_mismatch: self.fleet_mismatch.finish(file, &format!("{tag} psi_f"))?,
            battery_mismatch: self.battery_mismatch.finish(file, &format!("{tag} psi_b"))?,
        })
    }
}

fn fleet_csv(spec: &ScenarioSpec) -> String {
    let mut out = String::from("class,b,r,B,eta_b,beta_v,phi_v,phi_om_v,L_v,phi_b,L_b,psi_f,psi_b\n");
    for class in VehicleClass::BOTH {
        let f = spec.fleet.class(class);
        for (b, b_name) in spec.dims.batteries(class).iter().enumerate() {
            for (r, r_name) in spec.dims.mobility_regions.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    class.tag(),
                    b_name,
                    r_name,
                    f.battery_kwh[b],
                    f.efficiency_kwh_per_mile[b],
                    f.maintenance_per_mile,
                    f.vehicle_capital,
                    f.vehicle_om_per_day,
                    f.vehicle_life_days,
                    f.battery_capital_per_kwh,
                    f.battery_life_days,
                    f.fleet_mismatch[r],
                    f.battery_mismatch[r],
                );
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// chargers.csv: class,l,b,r,gamma,phi_c,L_c,psi_chdt

fn load_chargers(file: &TableFile, dims: &DimensionSets, lookup: &NameLookup) -> Result<ChargerParams, LoadError> {
    let cols: Vec<usize> = ["class", "l", "b", "r", "gamma", "phi_c", "L_c", "psi_chdt"]
        .iter()
        .map(|c| file.col(c))
        .collect::<Result<_, _>>()?;

    let mut builders: [(Fill<f64>, Fill<f64>, Fill<f64>, Fill<f64>); 2] = [
        (
            Fill::new(dims.ldv_levels.len()),
            Fill::new(dims.ldv_levels.len()),
            Fill::new(dims.ldv_levels.len()),
            Fill::new(dims.ldv_batteries.len() * dims.ldv_levels.len() * dims.n_regions()),
        ),
        (
            Fill::new(dims.hdv_levels.len()),
            Fill::new(dims.hdv_levels.len()),
            Fill::new(dims.hdv_levels.len()),
            Fill::new(dims.hdv_batteries.len() * dims.hdv_levels.len() * dims.n_regions()),
        ),
    ];

    for row in 0..file.rows.len() {
        let class = parse_class(file, row, file.text(row, cols[0]))?;
        let slot = NameLookup::class_slot(class);
        let l = resolve(file, row, &lookup.levels[slot], "charger level", file.text(row, cols[1]))?;
        let b = resolve(file, row, &lookup.batteries[slot], "battery", file.text(row, cols[2]))?;
        let r = resolve(file, row, &lookup.mobility, "mobility region", file.text(row, cols[3]))?;
        let n_levels = dims.levels(class).len();
        let (rating, capital, life, psi) = &mut builders[slot];
        rating.set(l, file.number(row, cols[4])?).map_err(|m| file.bad(row, m.into()))?;
        capital.set(l, file.number(row, cols[5])?).map_err(|m| file.bad(row, m.into()))?;
        life.set(l, file.number(row, cols[6])?).map_err(|m| file.bad(row, m.into()))?;
        psi.set(dims.idx_blr(n_levels, b, l, r), file.number(row, cols[7])?)
            .map_err(|m| file.bad(row, m.into()))?;
    }

    let [ldv, hdv] = builders;
    Ok(ChargerParams {
        ldv: ClassChargers {
            rating_kw: ldv.0.finish(file, "ldv gamma")?,
            capital_per_kw: ldv.1.finish(file, "ldv phi_c")?,
            life_days: ldv.2.finish(file, "ldv L_c")?,
            charge_deadhead_time: ldv.3.finish(file, "ldv psi_chdt")?,
        },
        hdv: ClassChargers {
            rating_kw: hdv.0.finish(file, "hdv gamma")?,
            capital_per_kw: hdv.1.finish(file, "hdv phi_c")?,
            life_days: hdv.2.finish(file, "hdv L_c")?,
            charge_deadhead_time: hdv.3.finish(file, "hdv psi_chdt")?,
        },
    })
}

fn chargers_csv(spec: &ScenarioSpec) -> String {
    let mut out = String::from("class,l,b,r,gamma,phi_c,L_c,psi_chdt\n");
    for class in VehicleClass::BOTH {
        let ch = spec.chargers.class(class);
        let n_levels = spec.dims.levels(class).len();
        for (l, l_name) in spec.dims.levels(class).iter().enumerate() {
            for (b, b_name) in spec.dims.batteries(class).iter().enumerate() {
                for (r, r_name) in spec.dims.mobility_regions.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        class.tag(),
                        l_name,
                        b_name,
                        r_name,
                        ch.rating_kw[l],
                        ch.capital_per_kw[l],
                        ch.life_days[l],
                        ch.charge_deadhead_time[spec.dims.idx_blr(n_levels, b, l, r)],
                    );
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// demand.csv: class,d,t,r,dd,rho,nu,sigma,psi_chdd,psi_cdd,psi_cdt

fn load_demand(file: &TableFile, dims: &DimensionSets, lookup: &NameLookup) -> Result<MobilityDemand, LoadError> {
    let cols: Vec<usize> = ["class", "d", "t", "r", "dd", "rho", "nu", "sigma", "psi_chdd", "psi_cdd", "psi_cdt"]
        .iter()
        .map(|c| file.col(c))
        .collect::<Result<_, _>>()?;

    let mut builders: [ClassDemandBuilder; 2] = [
        ClassDemandBuilder::new(dims.ldv_bins.len(), dims.n_hours, dims.n_regions()),
        ClassDemandBuilder::new(dims.hdv_bins.len(), dims.n_hours, dims.n_regions()),
    ];

    for row in 0..file.rows.len() {
        let class = parse_class(file, row, file.text(row, cols[0]))?;
        let slot = NameLookup::class_slot(class);
        let d = resolve(file, row, &lookup.bins[slot], "distance bin", file.text(row, cols[1]))?;
        let t = file.number(row, cols[2])? as usize;
        if t >= dims.n_hours {
            return Err(file.bad(row, format!("hour {t} out of range 0..{}", dims.n_hours)));
        }
        let r = resolve(file, row, &lookup.mobility, "mobility region", file.text(row, cols[3]))?;
        let n_bins = dims.bins(class).len();
        let idx = dims.idx_dtr(n_bins, d, t, r);
        let b = &mut builders[slot];
        b.trips.set(idx, file.number(row, cols[4])?).map_err(|m| file.bad(row, m.into()))?;
        b.trip_miles.set(d, file.number(row, cols[5])?).map_err(|m| file.bad(row, m.into()))?;
        b.speed.set(idx, file.number(row, cols[6])?).map_err(|m| file.bad(row, m.into()))?;
        b.sharing.set(d, file.number(row, cols[7])?).map_err(|m| file.bad(row, m.into()))?;
        b.psi_chdd.set(r, file.number(row, cols[8])?).map_err(|m| file.bad(row, m.into()))?;
        b.psi_cdd.set(r, file.number_or(row, cols[9], 1.0)?).map_err(|m| file.bad(row, m.into()))?;
        b.psi_cdt.set(r, file.number_or(row, cols[10], 1.0)?).map_err(|m| file.bad(row, m.into()))?;
    }

    let [ldv, hdv] = builders;
    Ok(MobilityDemand { ldv: ldv.finish(file, "ldv")?, hdv: hdv.finish(file, "hdv")? })
}

struct ClassDemandBuilder {
    trips: Fill<f64>,
    trip_miles: Fill<f64>,
    speed: Fill<f64>,
    sharing: Fill<f64>,
    psi_chdd: Fill<f64>,
    psi_cdd: Fill<f64>,
    psi_cdt: Fill<f64>,
}

impl ClassDemandBuilder {
    fn new(n_bins: usize, n_hours: usize, n_regions: usize) -> Self {
        ClassDemandBuilder {
            trips: Fill::new(n_bins * n_hours * n_regions),
            trip_miles: Fill::new(n_bins),
            speed: Fill::new(n_bins * n_hours * n_regions),
            sharing: Fill::new(n_bins),
            psi_chdd: Fill::new(n_regions),
            psi_cdd: Fill::new(n_regions),
            psi_cdt: Fill::new(n_regions),
        }
    }

    fn finish(self, file: &TableFile, tag: &str) -> Result<ClassDemand, LoadError> {
        Ok(ClassDemand {
            trips: self.trips.finish(file, &format!("{tag} dd"))?,
            trip_miles: self.trip_miles.finish(file, &format!("{tag} rho"))?,
            speed_mph: self.speed.finish(file, &format!("{tag} nu"))?,
            sharing: self.sharing.finish(file, &format!("{tag} sigma"))?,
            charge_deadhead_distance: self.psi_chdd.finish(file, &format!("{tag} psi_chdd"))?,
            customer_deadhead_distance: self.psi_cdd.finish(file, &format!("{tag} psi_cdd"))?,
            customer_deadhead_time: self.psi_cdt.finish(file, &format!("{tag} psi_cdt"))?,
        })
    }
}

fn demand_csv(spec: &ScenarioSpec) -> String {
    let mut out = String::from("class,d,t,r,dd,rho,nu,sigma,psi_chdd,psi_cdd,psi_cdt\n");
    for class in VehicleClass::BOTH {
        let dem = spec.demand.class(class);
        let n_bins = spec.dims.bins(class).len();
        for (d, d_name) in spec.dims.bins(class).iter().enumerate() {
            for t in 0..spec.dims.n_hours {
                for (r, r_name) in spec.dims.mobility_regions.iter().enumerate() {
                    let idx = spec.dims.idx_dtr(n_bins, d, t, r);
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        class.tag(),
                        d_name,
                        t,
                        r_name,
                        dem.trips[idx],
                        dem.trip_miles[d],
                        dem.speed_mph[idx],
                        dem.sharing[d],
                        dem.charge_deadhead_distance[r],
                        dem.customer_deadhead_distance[r],
                        dem.customer_deadhead_time[r],
                    );
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// grid.csv: record,id,region,to_region,t,cost,cap,beta

fn load_grid(
    file: &TableFile,
    dims: &DimensionSets,
    lookup: &NameLookup,
    manifest: &Manifest,
) -> Result<GridParams, LoadError> {
    let cols: Vec<usize> = ["record", "id", "region", "to_region", "t", "cost", "cap", "beta"]
        .iter()
        .map(|c| file.col(c))
        .collect::<Result<_, _>>()?;

    let pairs = dims.transmission_pairs();
    let n_gen = dims.generators.len();
    let mut gen_cost = Fill::new(n_gen);
    let mut gen_cap = Fill::new(n_gen);
    let mut gen_region = Fill::new(n_gen);
    let mut trans_cost: Vec<Option<f64>> = vec![None; pairs.len() * dims.n_hours];
    let mut trans_cap = vec![0.0; pairs.len()];
    let mut demand_charge = Fill::new(dims.n_regions());

    for row in 0..file.rows.len() {
        match file.text(row, cols[0]) {
            "generator" => {
                let g = resolve(file, row, &lookup.generators, "generator", file.text(row, cols[1]))?;
                let i = resolve(file, row, &lookup.grid, "grid region", file.text(row, cols[2]))?;
                gen_region.set(g, i).map_err(|m| file.bad(row, m.into()))?;
                gen_cost.set(g, file.number(row, cols[5])?).map_err(|m| file.bad(row, m.into()))?;
                gen_cap.set(g, file.number(row, cols[6])?).map_err(|m| file.bad(row, m.into()))?;
            }
            "transmission" => {
                let from = resolve(file, row, &lookup.grid, "grid region", file.text(row, cols[2]))?;
                let to = resolve(file, row, &lookup.grid, "grid region", file.text(row, cols[3]))?;
                if from == to {
                    return Err(file.bad(row, "transmission self-loops are not allowed".into()));
                }
                let pair = dims.transmission_pair_index(from, to);
                let cost = file.number(row, cols[5])?;
                trans_cap[pair] = file.number(row, cols[6])?;
                let t_raw = file.text(row, cols[4]);
                if t_raw.is_empty() {
                    for t in 0..dims.n_hours {
                        trans_cost[pair * dims.n_hours + t] = Some(cost);
                    }
                } else {
                    let t = file.number(row, cols[4])? as usize;
                    if t >= dims.n_hours {
                        return Err(file.bad(row, format!("hour {t} out of range 0..{}", dims.n_hours)));
                    }
                    trans_cost[pair * dims.n_hours + t] = Some(cost);
                }
            }
            "demand_charge" => {
                let r = resolve(file, row, &lookup.mobility, "mobility region", file.text(row, cols[2]))?;
                demand_charge.set(r, file.number(row, cols[7])?).map_err(|m| file.bad(row, m.into()))?;
            }
            other => return Err(file.bad(row, format!("unknown record kind `{other}`"))),
        }
    }

    // Undeclared links carry zero capacity and zero cost.
    let trans_cost: Vec<f64> = trans_cost.into_iter().map(|v| v.unwrap_or(0.0)).collect();

    Ok(GridParams {
        gen_cost: gen_cost.finish(file, "generator cost")?,
        gen_cap_kw: gen_cap.finish(file, "generator capacity")?,
        gen_region: gen_region.finish(file, "generator region")?,
        trans_cost,
        trans_cap_kw: trans_cap,
        eta_trans: manifest.required("eta_trans")?,
        demand_charge: demand_charge.finish(file, "demand charge")?,
        discount_per_day: manifest.required("rho_disc")?,
        horizon_days: manifest.required("n_days")?,
    })
}

fn grid_csv(spec: &ScenarioSpec) -> String {
    let mut out = String::from("record,id,region,to_region,t,cost,cap,beta\n");
    let dims = &spec.dims;
    for (g, name) in dims.generators.iter().enumerate() {
        let _ = writeln!(
            out,
            "generator,{name},{},,,{},{},",
            dims.grid_regions[spec.grid.gen_region[g]],
            spec.grid.gen_cost[g],
            spec.grid.gen_cap_kw[g],
        );
    }
    for (pair, &(from, to)) in dims.transmission_pairs().iter().enumerate() {
        let costs = &spec.grid.trans_cost[pair * dims.n_hours..(pair + 1) * dims.n_hours];
        let constant = costs.windows(2).all(|w| w[0] == w[1]);
        if spec.grid.trans_cap_kw[pair] == 0.0 && constant && costs.first().copied().unwrap_or(0.0) == 0.0 {
            continue; // undeclared link
        }
        if constant {
            let _ = writeln!(
                out,
                "transmission,,{},{},,{},{},",
                dims.grid_regions[from], dims.grid_regions[to], costs[0], spec.grid.trans_cap_kw[pair],
            );
        } else {
            for (t, &c) in costs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "transmission,,{},{},{t},{c},{},",
                    dims.grid_regions[from], dims.grid_regions[to], spec.grid.trans_cap_kw[pair],
                );
            }
        }
    }
    for (r, name) in dims.mobility_regions.iter().enumerate() {
        let _ = writeln!(out, "demand_charge,,{name},,,,,{}", spec.grid.demand_charge[r]);
    }
    out
}

// ---------------------------------------------------------------------------
// exogenous_loads.csv

const EXO_HEADER: &str = "record,t,region,p_other,p_private,p_hpriv_lb,p_hpriv_ub,e_hpriv_lb,e_hpriv_ub,p_hhdr_lb,p_hhdr_ub,e_hhdr_lb,e_hhdr_ub";

fn load_exogenous(file: &TableFile, dims: &DimensionSets, lookup: &NameLookup) -> Result<ExogenousLoads, LoadError> {
    let cols: Vec<usize> = EXO_HEADER.split(',').map(|c| file.col(c)).collect::<Result<_, _>>()?;

    let mut other = Fill::new(dims.n_grid_regions() * dims.n_hours);
    let tr = dims.n_hours * dims.n_regions();
    let mut private = Fill::new(tr);
    let mut auto: [Fill<f64>; 4] = [Fill::new(tr), Fill::new(tr), Fill::new(tr), Fill::new(tr)];
    let mut human: [Fill<f64>; 4] = [Fill::new(tr), Fill::new(tr), Fill::new(tr), Fill::new(tr)];

    for row in 0..file.rows.len() {
        let t = file.number(row, cols[1])? as usize;
        if t >= dims.n_hours {
            return Err(file.bad(row, format!("hour {t} out of range 0..{}", dims.n_hours)));
        }
        match file.text(row, cols[0]) {
            "grid" => {
                let i = resolve(file, row, &lookup.grid, "grid region", file.text(row, cols[2]))?;
                other.set(dims.idx_it(i, t), file.number(row, cols[3])?).map_err(|m| file.bad(row, m.into()))?;
            }
            "mobility" => {
                let r = resolve(file, row, &lookup.mobility, "mobility region", file.text(row, cols[2]))?;
                let k = dims.idx_tr(t, r);
                private.set(k, file.number(row, cols[4])?).map_err(|m| file.bad(row, m.into()))?;
                for (j, fill) in auto.iter_mut().enumerate() {
                    fill.set(k, file.number(row, cols[5 + j])?).map_err(|m| file.bad(row, m.into()))?;
                }
                for (j, fill) in human.iter_mut().enumerate() {
                    fill.set(k, file.number(row, cols[9 + j])?).map_err(|m| file.bad(row, m.into()))?;
                }
            }
            other => return Err(file.bad(row, format!("unknown record kind `{other}`"))),
        }
    }

    let [a0, a1, a2, a3] = auto;
    let [h0, h1, h2, h3] = human;
    Ok(ExogenousLoads {
        other_kw: other.finish(file, "p_other")?,
        private_ldv_kw: private.finish(file, "p_private")?,
        private_auto: EnvelopeSet {
            power_lb_kw: a0.finish(file, "p_hpriv_lb")?,
            power_ub_kw: a1.finish(file, "p_hpriv_ub")?,
            energy_lb_kwh: a2.finish(file, "e_hpriv_lb")?,
            energy_ub_kwh: a3.finish(file, "e_hpriv_ub")?,
        },
        private_human: EnvelopeSet {
            power_lb_kw: h0.finish(file, "p_hhdr_lb")?,
            power_ub_kw: h1.finish(file, "p_hhdr_ub")?,
            energy_lb_kwh: h2.finish(file, "e_hhdr_lb")?,
            energy_ub_kwh: h3.finish(file, "e_hhdr_ub")?,
        },
    })
}

fn exogenous_csv(spec: &ScenarioSpec) -> String {
    let dims = &spec.dims;
    let exo = &spec.exogenous;
    let mut out = String::from(EXO_HEADER);
    out.push('\n');
    for (i, name) in dims.grid_regions.iter().enumerate() {
        for t in 0..dims.n_hours {
            let _ = writeln!(out, "grid,{t},{name},{},,,,,,,,,", exo.other_kw[dims.idx_it(i, t)]);
        }
    }
    for (r, name) in dims.mobility_regions.iter().enumerate() {
        for t in 0..dims.n_hours {
            let k = dims.idx_tr(t, r);
            let _ = writeln!(
                out,
                "mobility,{t},{name},,{},{},{},{},{},{},{},{},{}",
                exo.private_ldv_kw[k],
                exo.private_auto.power_lb_kw[k],
                exo.private_auto.power_ub_kw[k],
                exo.private_auto.energy_lb_kwh[k],
                exo.private_auto.energy_ub_kwh[k],
                exo.private_human.power_lb_kw[k],
                exo.private_human.power_ub_kw[k],
                exo.private_human.energy_lb_kwh[k],
                exo.private_human.energy_ub_kwh[k],
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------

fn write_file(dir: &Path, name: &str, content: String) -> Result<(), LoadError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| io_err(&path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> LoadError {
    LoadError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, source: csv::Error) -> LoadError {
    LoadError::Csv { path: path.to_path_buf(), source }
}

#[allow(dead_code)]
fn path_buf(p: &Path) -> PathBuf {
    p.to_path_buf()
}
