//! XML configuration. A survey references scanner, platform and scene
//! definitions as `file.xml#id`, resolved relative to the referencing file.
//! The schema is described in `docs/xml-schema.md`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use roxmltree::{Document, Node};

use super::rng::{stream_rng, StreamKind};
use super::{FullwaveSettings, OutputFlags, ScannerSettings, Survey, SurveyLeg};
use crate::beam::{DeflectorKind, DeflectorSpec, ScannerSpec};
use crate::error::{Result, VlsError};
use crate::platform::{Leg, Mount, PlatformKind, PlatformSpec, TurnMode, DEFAULT_TICK_S};
use crate::raycast::{AxisAngle, KdTreeConfig, Material, RotationMode, Transform, Vec3, VoxelIncidence};
use crate::scene::{
    load_ascii_grid, load_pad_voxels, load_wavefront_obj, voxelize_point_cloud, NormalMode,
    PadVoxelMode, PadVoxelOptions, Scene, ScenePart, VoxelizeOptions, XyzColumns,
};
use crate::waveform::{LadLut, LadPreset};

/// Seed for scene randomness when neither the caller nor the survey sets one.
pub const DEFAULT_SCENE_SEED: &str = "0";

/// Attribute access with error locations.
struct Ctx<'a, 'input> {
    path: &'a Path,
    doc: &'a Document<'input>,
}

impl<'a, 'input> Ctx<'a, 'input> {
    fn line(&self, node: Node) -> usize {
        self.doc.text_pos_at(node.range().start).row as usize
    }

    fn err(&self, node: Node, msg: impl Into<String>) -> VlsError {
        VlsError::parse(self.path, self.line(node), msg)
    }

    fn parse<T: FromStr>(&self, node: Node, name: &str) -> Result<Option<T>> {
        match node.attribute(name) {
            None => Ok(None),
            Some(v) => v.trim().parse::<T>().map(Some).map_err(|_| {
                self.err(
                    node,
                    format!("attribute `{name}` of <{}>: invalid value `{v}`", node.tag_name().name()),
                )
            }),
        }
    }

    fn f64(&self, node: Node, name: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parse(node, name)?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(self.err(node, format!("attribute `{name}` must be finite, got {x}")));
            }
        }
        Ok(v)
    }

    fn f64_or(&self, node: Node, name: &str, default: f64) -> Result<f64> {
        Ok(self.f64(node, name)?.unwrap_or(default))
    }

    fn required_f64(&self, node: Node, name: &str) -> Result<f64> {
        self.f64(node, name)?.ok_or_else(|| {
            self.err(
                node,
                format!("<{}> is missing required attribute `{name}`", node.tag_name().name()),
            )
        })
    }

    /// Angle attribute given in degrees, returned in radians.
    fn deg(&self, node: Node, name: &str) -> Result<Option<f64>> {
        Ok(self.f64(node, name)?.map(f64::to_radians))
    }

    fn bool(&self, node: Node, name: &str) -> Result<Option<bool>> {
        match node.attribute(name).map(str::trim) {
            None => Ok(None),
            Some("true" | "1" | "yes") => Ok(Some(true)),
            Some("false" | "0" | "no") => Ok(Some(false)),
            Some(v) => Err(self.err(node, format!("attribute `{name}`: invalid boolean `{v}`"))),
        }
    }

    /// Parses a keyword attribute through `FromStr`, keeping the location.
    fn keyword<T: FromStr<Err = VlsError>>(&self, node: Node, name: &str) -> Result<Option<T>> {
        node.attribute(name)
            .map(|v| v.parse::<T>().map_err(|e| self.err(node, format!("attribute `{name}`: {e}"))))
            .transpose()
    }

    /// Warns about child elements this version does not understand.
    fn check_children(&self, node: Node, known: &[&str]) {
        for c in node.children().filter(Node::is_element) {
            let tag = c.tag_name().name();
            if !known.contains(&tag) {
                warn!(
                    "{}:{}: ignoring unknown element <{tag}> in <{}>",
                    self.path.display(),
                    self.line(c),
                    node.tag_name().name()
                );
            }
        }
    }

    /// Resolves a path attribute relative to this file. Missing files are errors.
    fn file(&self, node: Node, name: &str) -> Result<Option<PathBuf>> {
        let Some(v) = node.attribute(name) else {
            return Ok(None);
        };
        let target = self.path.parent().unwrap_or(Path::new(".")).join(v.trim());
        if !target.is_file() {
            return Err(VlsError::MissingReference {
                file: self.path.to_path_buf(),
                attribute: name.to_string(),
                target,
            });
        }
        Ok(Some(target))
    }

    fn required_file(&self, node: Node, name: &str) -> Result<PathBuf> {
        self.file(node, name)?.ok_or_else(|| {
            self.err(
                node,
                format!("<{}> is missing required attribute `{name}`", node.tag_name().name()),
            )
        })
    }

    /// `file.xml#id` reference: resolved path and optional id.
    fn reference(&self, node: Node, name: &str) -> Result<(PathBuf, Option<String>)> {
        let v = node.attribute(name).ok_or_else(|| {
            self.err(
                node,
                format!("<{}> is missing required attribute `{name}`", node.tag_name().name()),
            )
        })?;
        let (file, id) = match v.split_once('#') {
            Some((f, id)) => (f, Some(id.trim().to_string())),
            None => (v, None),
        };
        let target = self.path.parent().unwrap_or(Path::new(".")).join(file.trim());
        if !target.is_file() {
            return Err(VlsError::MissingReference {
                file: self.path.to_path_buf(),
                attribute: name.to_string(),
                target,
            });
        }
        Ok((target, id))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| VlsError::io(path, e))
}

fn parse_doc<'i>(path: &Path, text: &'i str) -> Result<Document<'i>> {
    Document::parse(text).map_err(|e| VlsError::parse(path, e.pos().row as usize, e.to_string()))
}

/// The element with tag `tag` and the requested id, or the first one.
fn select<'a, 'i>(ctx: &Ctx, doc: &'a Document<'i>, tag: &str, id: Option<&str>) -> Result<Node<'a, 'i>> {
    let mut all = doc.descendants().filter(|n| n.has_tag_name(tag));
    let found = match id {
        Some(id) => all.find(|n| n.attribute("id") == Some(id)),
        None => all.next(),
    };
    found.ok_or_else(|| {
        VlsError::Config(format!(
            "{}: no <{tag}>{} found",
            ctx.path.display(),
            id.map(|i| format!(" with id `{i}`")).unwrap_or_default()
        ))
    })
}

// ---------------------------------------------------------------- scanners

fn parse_scanner(ctx: &Ctx, n: Node, index: usize) -> Result<ScannerSpec> {
    let id = n.attribute("id").map_or_else(|| format!("scanner{index}"), str::to_string);
    let optics = n.attribute("optics").unwrap_or("oscillating");
    let kind: DeflectorKind = optics
        .parse()
        .map_err(|e: VlsError| ctx.err(n, format!("attribute `optics`: {e}")))?;
    let scan_angle_max = ctx.deg(n, "scanAngleMax_deg")?.unwrap_or(30f64.to_radians());
    let spec = ScannerSpec {
        name: n.attribute("name").unwrap_or(&id).to_string(),
        id,
        pulse_freq_hz: ctx.required_f64(n, "pulseFreq_hz")?,
        beam_divergence_rad: ctx.required_f64(n, "beamDivergence_rad")?,
        wavelength_nm: ctx.f64_or(n, "wavelength_nm", 1064.0)?,
        beam_waist_radius_m: ctx.f64(n, "beamWaistRadius_m")?,
        focusing_range_m: ctx.f64_or(n, "focusingRange_m", 1.0)?,
        pulse_length_ns: ctx.f64_or(n, "pulseLength_ns", 4.0)?,
        peak_power_w: ctx.f64_or(n, "peakPower_w", 4.0)?,
        range_error_std_m: ctx.f64_or(n, "accuracy_m", 0.0)?,
        receiver_diameter_m: ctx.f64_or(n, "receiverDiameter_m", 0.15)?,
        atmospheric_efficiency: ctx.f64_or(n, "atmosphericEfficiency", 0.9)?,
        max_returns: ctx.parse(n, "maxNOR")?.unwrap_or(0),
        beam_sample_quality: ctx.parse(n, "beamSampleQuality")?.unwrap_or(3),
        deflector: DeflectorSpec {
            kind,
            scan_freq: ctx.f64_or(n, "scanFreq_hz", 100.0)?,
            scan_angle_max,
            palmer_off_nadir: ctx.deg(n, "palmerOffNadir_deg")?.unwrap_or(scan_angle_max),
        },
    };
    ctx.check_children(n, &[]);
    spec.validate().map_err(|e| ctx.err(n, e.to_string()))?;
    Ok(spec)
}

/// Every `<scanner>` in a scanner file.
pub fn parse_scanner_catalogue(path: &Path) -> Result<Vec<ScannerSpec>> {
    let text = read(path)?;
    let doc = parse_doc(path, &text)?;
    let ctx = Ctx { path, doc: &doc };
    let specs = doc
        .descendants()
        .filter(|n| n.has_tag_name("scanner"))
        .enumerate()
        .map(|(i, n)| parse_scanner(&ctx, n, i))
        .collect::<Result<Vec<_>>>()?;
    if specs.is_empty() {
        return Err(VlsError::Config(format!("{}: no <scanner> defined", path.display())));
    }
    Ok(specs)
}

// --------------------------------------------------------------- platforms

fn parse_platform(ctx: &Ctx, n: Node) -> Result<PlatformSpec> {
    let id = n.attribute("id").unwrap_or("platform");
    let kind: PlatformKind = ctx
        .keyword(n, "type")?
        .ok_or_else(|| ctx.err(n, "<platform> is missing required attribute `type`"))?;
    let mut p = PlatformSpec::new(id, kind);
    p.max_accel = ctx.f64_or(n, "maxAccel_m_s2", p.max_accel)?;
    p.max_turn_radius = ctx.f64_or(n, "maxTurnRadius_m", p.max_turn_radius)?;
    p.turn_mode = ctx.keyword::<TurnMode>(n, "turnMode")?.unwrap_or_default();
    p.bank_limit = ctx.deg(n, "bankLimit_deg")?.unwrap_or(p.bank_limit);
    p.yaw_rate = ctx.deg(n, "yawRate_deg_s")?.unwrap_or(p.yaw_rate);
    p.mount_height = ctx.f64_or(n, "mountHeight_m", p.mount_height)?;
    p.position_noise_std = ctx.f64_or(n, "positionNoise_m", 0.0)?;
    ctx.check_children(n, &["scannerMount"]);
    if let Some(m) = n.children().find(|c| c.has_tag_name("scannerMount")) {
        p.mount = Mount {
            offset: Vec3::new(ctx.f64_or(m, "x", 0.0)?, ctx.f64_or(m, "y", 0.0)?, ctx.f64_or(m, "z", 0.0)?),
            roll: ctx.deg(m, "roll_deg")?.unwrap_or(0.0),
            pitch: ctx.deg(m, "pitch_deg")?.unwrap_or(0.0),
            yaw: ctx.deg(m, "yaw_deg")?.unwrap_or(0.0),
        };
    }
    p.validate().map_err(|e| ctx.err(n, e.to_string()))?;
    Ok(p)
}

pub fn parse_platform_file(path: &Path, id: Option<&str>) -> Result<PlatformSpec> {
    let text = read(path)?;
    let doc = parse_doc(path, &text)?;
    let ctx = Ctx { path, doc: &doc };
    let node = select(&ctx, &doc, "platform", id)?;
    parse_platform(&ctx, node)
}

// ------------------------------------------------------------------ scenes

fn parse_material(ctx: &Ctx, n: Node, base: Material) -> Result<Material> {
    Ok(Material {
        name: n.attribute("name").map_or(base.name, str::to_string),
        reflectance: ctx.f64_or(n, "reflectance", base.reflectance)?,
        specularity: ctx.f64_or(n, "specularity", base.specularity)?,
        is_ground: ctx.bool(n, "isGround")?.unwrap_or(base.is_ground),
        classification: ctx.parse(n, "classification")?.unwrap_or(base.classification),
    })
}

fn parse_axis(ctx: &Ctx, n: Node) -> Result<Vec3> {
    let v = n.attribute("axis").unwrap_or("z").trim();
    match v {
        "x" | "X" => Ok(Vec3::x()),
        "y" | "Y" => Ok(Vec3::y()),
        "z" | "Z" => Ok(Vec3::z()),
        _ => {
            let c: Vec<f64> = v
                .split(|ch: char| ch.is_whitespace() || ch == ',')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| ctx.err(n, format!("invalid rotation axis `{v}`")))?;
            match c[..] {
                [x, y, z] => Ok(Vec3::new(x, y, z)),
                _ => Err(ctx.err(n, format!("invalid rotation axis `{v}`"))),
            }
        }
    }
}

fn parse_transform(ctx: &Ctx, n: Node) -> Result<Transform> {
    let mut t = Transform {
        scale: ctx.f64_or(n, "scale", 1.0)?,
        ..Transform::default()
    };
    t.mode = match n.attribute("mode").map(str::to_ascii_lowercase).as_deref() {
        None | Some("extrinsic") | Some("global") => RotationMode::Extrinsic,
        Some("intrinsic") | Some("local") => RotationMode::Intrinsic,
        Some(v) => return Err(ctx.err(n, format!("unknown rotation mode `{v}`"))),
    };
    ctx.check_children(n, &["rotate", "translate"]);
    for c in n.children().filter(Node::is_element) {
        match c.tag_name().name() {
            "rotate" => t.rotations.push(AxisAngle {
                axis: parse_axis(ctx, c)?,
                angle: ctx.deg(c, "angle_deg")?.unwrap_or(0.0),
            }),
            "translate" => {
                t.translation += Vec3::new(ctx.f64_or(c, "x", 0.0)?, ctx.f64_or(c, "y", 0.0)?, ctx.f64_or(c, "z", 0.0)?)
            }
            _ => {}
        }
    }
    t.validate().map_err(|e| ctx.err(n, e.to_string()))?;
    Ok(t)
}

fn parse_incidence(ctx: &Ctx, n: Node) -> Result<VoxelIncidence> {
    match n.attribute("incidence").map(str::to_ascii_lowercase).as_deref() {
        None | Some("face") => Ok(VoxelIncidence::Face),
        Some("zero") | Some("none") => Ok(VoxelIncidence::Zero),
        Some(v) => Err(ctx.err(n, format!("unknown incidence mode `{v}`"))),
    }
}

fn parse_part(ctx: &Ctx, n: Node, index: u32, seed: &str) -> Result<ScenePart> {
    ctx.check_children(n, &["transform", "material"]);
    let file = ctx.required_file(n, "file")?;
    let material_node = n.children().find(|c| c.has_tag_name("material"));
    let material = |base: Material| -> Result<Material> {
        match material_node {
            Some(m) => parse_material(ctx, m, base),
            None => Ok(base),
        }
    };
    let kind = n.attribute("type").unwrap_or_else(|| {
        match file.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("asc") => "raster",
            Some("xyz") | Some("txt") => "xyz",
            Some("vox") => "vox",
            _ => "obj",
        }
    });
    let mut part = match kind.to_ascii_lowercase().as_str() {
        "obj" => {
            let mtl = ctx.file(n, "mtl")?;
            let mut part = load_wavefront_obj(&file, mtl.as_deref(), index)?;
            if let Some(m) = material_node {
                part.override_material(parse_material(ctx, m, Material::default())?);
            }
            part
        }
        "raster" | "geotiff" | "asc" => {
            let m = material_node.map(|m| parse_material(ctx, m, Material::default())).transpose()?;
            load_ascii_grid(&file, m, index)?
        }
        "xyz" | "pointcloud" => {
            let mut opts = VoxelizeOptions::new(ctx.required_f64(n, "voxelSize")?);
            opts.normal_mode = ctx.keyword::<NormalMode>(n, "normalMode")?.unwrap_or_default();
            opts.columns = match n.attribute("columns").map(str::to_ascii_lowercase).as_deref() {
                None | Some("auto") => XyzColumns::Auto,
                Some("rgb") => XyzColumns::Rgb,
                Some(v) => return Err(ctx.err(n, format!("unknown column layout `{v}`"))),
            };
            if let Some(b) = ctx.parse::<u64>(n, "batchPoints")? {
                opts.max_points_per_batch = b;
            }
            let cloud = voxelize_point_cloud(&file, &opts)?;
            cloud.into_part(Arc::new(material(Material::default())?), parse_incidence(ctx, n)?, index)
        }
        "vox" | "voxels" => {
            let lut = match ctx.file(n, "ladFile")? {
                Some(p) => LadLut::from_file(&p)?,
                None => LadLut::preset(ctx.keyword::<LadPreset>(n, "lad")?.unwrap_or(LadPreset::Spherical)),
            };
            let opts = PadVoxelOptions {
                mode: ctx.keyword::<PadVoxelMode>(n, "mode")?.unwrap_or_default(),
                alpha: ctx.f64_or(n, "alpha", 0.5)?,
                pad_max: ctx.f64(n, "padMax")?,
                random_shift: ctx.bool(n, "randomShift")?.unwrap_or(false),
                incidence: parse_incidence(ctx, n)?,
                lut: Arc::new(lut),
            };
            let mut rng = stream_rng(seed, StreamKind::Scene, index as u64);
            let base = Material {
                name: "vegetation".into(),
                classification: 5,
                ..Material::default()
            };
            load_pad_voxels(&file, &opts, Arc::new(material(base)?), index, &mut rng)?
        }
        other => return Err(ctx.err(n, format!("unknown part type `{other}`"))),
    };
    if let Some(id) = n.attribute("id") {
        part.id = id.to_string();
    }
    if let Some(t) = n.children().find(|c| c.has_tag_name("transform")) {
        part.apply_transform(parse_transform(ctx, t)?)?;
    }
    Ok(part)
}

/// Loads and assembles the scene `id` (or the first scene) of a scene file.
/// `seed` drives random voxel shifts.
pub fn parse_scene_file(path: &Path, id: Option<&str>, seed: &str) -> Result<Scene> {
    let text = read(path)?;
    let doc = parse_doc(path, &text)?;
    let ctx = Ctx { path, doc: &doc };
    let node = select(&ctx, &doc, "scene", id)?;
    ctx.check_children(node, &["part"]);
    let parts = node
        .children()
        .filter(|c| c.has_tag_name("part"))
        .enumerate()
        .map(|(i, c)| parse_part(&ctx, c, i as u32, seed))
        .collect::<Result<Vec<_>>>()?;
    let name = node
        .attribute("name")
        .or(node.attribute("id"))
        .unwrap_or("scene");
    Scene::assemble(name, parts, KdTreeConfig::default())
}

// ----------------------------------------------------------------- surveys

fn parse_scanner_settings(ctx: &Ctx, n: Node, base: ScannerSettings) -> Result<ScannerSettings> {
    Ok(ScannerSettings {
        active: ctx.bool(n, "active")?.unwrap_or(base.active),
        pulse_freq_hz: ctx.f64(n, "pulseFreq_hz")?.or(base.pulse_freq_hz),
        scan_freq_hz: ctx.f64(n, "scanFreq_hz")?.or(base.scan_freq_hz),
        scan_angle_max: ctx.deg(n, "scanAngle_deg")?.or(base.scan_angle_max),
        head_rotate_per_sec: ctx.deg(n, "headRotatePerSec_deg")?.unwrap_or(base.head_rotate_per_sec),
        head_rotate_start: ctx.deg(n, "headRotateStart_deg")?.unwrap_or(base.head_rotate_start),
        head_rotate_stop: ctx.deg(n, "headRotateStop_deg")?.or(base.head_rotate_stop),
        duration_s: ctx.f64(n, "duration_s")?.or(base.duration_s),
    })
}

fn parse_platform_settings(ctx: &Ctx, n: Node, base: Leg) -> Result<Leg> {
    Ok(Leg {
        waypoint: Vec3::new(
            ctx.f64_or(n, "x", base.waypoint.x)?,
            ctx.f64_or(n, "y", base.waypoint.y)?,
            ctx.f64_or(n, "z", base.waypoint.z)?,
        ),
        speed: ctx.f64_or(n, "speed_m_s", base.speed)?,
        start_yaw: ctx.deg(n, "yawStart_deg")?.or(base.start_yaw),
        end_yaw: ctx.deg(n, "yawEnd_deg")?.or(base.end_yaw),
        duration: base.duration,
    })
}

fn static_duration(s: &ScannerSettings) -> Option<f64> {
    s.duration_s.or_else(|| match s.head_rotate_stop {
        Some(stop) if s.head_rotate_per_sec != 0.0 => {
            Some((stop - s.head_rotate_start).abs() / s.head_rotate_per_sec.abs())
        }
        _ => None,
    })
}

/// Parses a survey and everything it references. Scene randomness uses the
/// survey seed, or `"0"` when none is set.
pub fn parse_survey(path: &Path) -> Result<Survey> {
    parse_survey_with_seed(path, None)
}

/// Like `parse_survey`; a caller seed takes precedence over the survey seed
/// for scene randomness.
pub fn parse_survey_with_seed(path: &Path, seed: Option<&str>) -> Result<Survey> {
    let text = read(path)?;
    let doc = parse_doc(path, &text)?;
    let ctx = Ctx { path, doc: &doc };
    let s = select(&ctx, &doc, "survey", None)?;
    ctx.check_children(
        s,
        &["leg", "FWFSettings", "platformSettings", "scannerSettings", "output"],
    );

    let (scanner_path, scanner_id) = ctx.reference(s, "scanner")?;
    let (platform_path, platform_id) = ctx.reference(s, "platform")?;
    let (scene_path, scene_id) = ctx.reference(s, "scene")?;

    let catalogue = parse_scanner_catalogue(&scanner_path)?;
    let scanner = match &scanner_id {
        Some(id) => catalogue.iter().find(|c| &c.id == id).cloned().ok_or_else(|| {
            VlsError::Config(format!(
                "{}: scanner `{id}` not found in {}",
                path.display(),
                scanner_path.display()
            ))
        })?,
        None => catalogue[0].clone(),
    };
    let platform = parse_platform_file(&platform_path, platform_id.as_deref())?;

    let xml_seed = s.attribute("seed").map(str::to_string);
    let scene_seed = seed.or(xml_seed.as_deref()).unwrap_or(DEFAULT_SCENE_SEED);
    let scene = parse_scene_file(&scene_path, scene_id.as_deref(), scene_seed)?;

    let name = s
        .attribute("name")
        .map(str::to_string)
        .or_else(|| path.file_stem().map(|f| f.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "survey".into());
    let mut survey = Survey::new(name, scanner, platform, Arc::new(scene));
    survey.path = path.to_path_buf();
    survey.scanner_catalogue = catalogue;
    survey.seed = xml_seed;
    survey.trajectory_interval_s = ctx.f64_or(s, "trajectoryInterval_s", 0.1)?;
    survey.tick_s = ctx.f64_or(s, "kinematicsTick_s", DEFAULT_TICK_S)?;

    if let Some(f) = s.children().find(|c| c.has_tag_name("FWFSettings")) {
        let d = FullwaveSettings::default();
        let num = |names: &[&str], default: f64| -> Result<f64> {
            for name in names {
                if let Some(v) = ctx.f64(f, name)? {
                    return Ok(v);
                }
            }
            Ok(default)
        };
        survey.fullwave = FullwaveSettings {
            bin_width_ns: num(&["binWidth_ns", "binWidthNs"], d.bin_width_ns)?,
            max_fullwave_range_ns: num(&["maxFullwaveRange_ns", "maxFullwaveRangeNs"], d.max_fullwave_range_ns)?,
            beam_sample_quality: ctx.parse(f, "beamSampleQuality")?,
            min_power_fraction: num(&["minPowerFraction"], d.min_power_fraction)?,
        };
    }
    if let Some(o) = s.children().find(|c| c.has_tag_name("output")) {
        survey.outputs = OutputFlags {
            las: ctx.bool(o, "lasOutput")?.unwrap_or(false),
            write_waveform: ctx.bool(o, "writeWaveform")?.unwrap_or(false),
            calc_echo_width: ctx.bool(o, "calcEchowidth")?.unwrap_or(false),
            zip: ctx.bool(o, "zipOutput")?.unwrap_or(false),
        };
    }

    let mut leg_template = Leg::new(Vec3::zeros(), 0.0);
    let mut scan_template = ScannerSettings::default();
    if let Some(p) = s.children().find(|c| c.has_tag_name("platformSettings")) {
        leg_template = parse_platform_settings(&ctx, p, leg_template)?;
    }
    if let Some(p) = s.children().find(|c| c.has_tag_name("scannerSettings")) {
        scan_template = parse_scanner_settings(&ctx, p, scan_template)?;
    }
    for (i, leg) in s.children().filter(|c| c.has_tag_name("leg")).enumerate() {
        ctx.check_children(leg, &["platformSettings", "scannerSettings"]);
        let mut platform_leg = match leg.children().find(|c| c.has_tag_name("platformSettings")) {
            Some(p) => parse_platform_settings(&ctx, p, leg_template)?,
            None => leg_template,
        };
        let scanner = match leg.children().find(|c| c.has_tag_name("scannerSettings")) {
            Some(p) => parse_scanner_settings(&ctx, p, scan_template)?,
            None => scan_template,
        };
        if survey.platform.kind == PlatformKind::Static {
            platform_leg.duration = Some(static_duration(&scanner).ok_or_else(|| {
                ctx.err(
                    leg,
                    format!("leg {i}: a static leg needs `duration_s` or a head rotation with `headRotateStop_deg`"),
                )
            })?);
        }
        survey.legs.push(SurveyLeg {
            platform: platform_leg,
            scanner,
        });
    }
    survey.validate()?;
    Ok(survey)
}
