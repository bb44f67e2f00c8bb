#!/usr/bin/env python3
"""Writes the example scenes and surveys under data/.

Run from the repository root: python3 tools/gen_example_data.py
"""

import math
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def box(x0, y0, z0, x1, y1, z1):
    v = [
        (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
        (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
    ]
    faces = [
        (0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
        (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7),
    ]
    return v, faces


def prism(cx, cy, r, z0, z1, sides=8):
    ring = [(cx + r * math.cos(2 * math.pi * k / sides), cy + r * math.sin(2 * math.pi * k / sides))
            for k in range(sides)]
    v = [(x, y, z0) for x, y in ring] + [(x, y, z1) for x, y in ring]
    faces = [tuple(range(sides - 1, -1, -1)), tuple(range(sides, 2 * sides))]
    for k in range(sides):
        n = (k + 1) % sides
        faces.append((k, n, sides + n, sides + k))
    return v, faces


class Obj:
    def __init__(self, mtllib=None):
        self.lines = [f"mtllib {mtllib}"] if mtllib else []
        self.count = 0

    def add(self, shape, material=None):
        v, faces = shape
        if material:
            self.lines.append(f"usemtl {material}")
        self.lines += [f"v {x:.4f} {y:.4f} {z:.4f}" for x, y, z in v]
        self.lines += ["f " + " ".join(str(self.count + i + 1) for i in f) for f in faces]
        self.count += len(v)

    def write(self, path):
        path.write_text("\n".join(self.lines) + "\n")


def quad(x0, y0, x1, y1, z=0.0):
    return [(x0, y0, z), (x1, y0, z), (x1, y1, z), (x0, y1, z)], [(0, 1, 2, 3)]


def write(name, text):
    (DATA / name).write_text(text.lstrip())


def main():
    DATA.mkdir(exist_ok=True)

    write("materials.mtl", """
newmtl ground
Kd 0.2 0.2 0.2
isGround true
classification 2

newmtl wall
Kd 0.5 0.5 0.5
classification 6

newmtl pole
Kd 0.3 0.3 0.3
classification 1

newmtl bark
Kd 0.25 0.2 0.15
classification 4
""")

    # TLS: ground, trunk and a transmissive crown north of the scanner.
    tls = Obj("materials.mtl")
    tls.add(quad(-20, -20, 20, 30), "ground")
    tls.add(prism(0.0, 10.0, 0.2, 0.0, 4.0), "bark")
    tls.write(DATA / "tls_ground_trunk.obj")

    lo, hi, res = (-4.0, 6.0, 2.0), (4.0, 14.0, 10.0), 0.5
    split = [round((h - l) / res) for l, h in zip(lo, hi)]
    rows = ["min_corner: %g %g %g" % lo, "max_corner: %g %g %g" % hi, "split: %d %d %d" % tuple(split),
            "i j k PadBVTotal"]
    for i in range(split[0]):
        for j in range(split[1]):
            for k in range(split[2]):
                c = [lo[a] + (idx + 0.5) * res for a, idx in enumerate((i, j, k))]
                r2 = (c[0] / 3.0) ** 2 + ((c[1] - 10.0) / 3.0) ** 2 + ((c[2] - 6.5) / 3.0) ** 2
                if r2 < 1.0:
                    rows.append(f"{i} {j} {k} {1.5 * (1.0 - r2):.4f}")
    write("tls_crown.vox", "\n".join(rows) + "\n")

    # MLS: road with walls and poles along the left side.
    mls = Obj("materials.mtl")
    mls.add(quad(-80, -20, 80, 20), "ground")
    for k in range(8):
        x = -60 + 16 * k
        mls.add(box(x, 8, 0, x + 10, 12, 6 + (k % 3)), "wall")
        mls.add(prism(x + 13, 5, 0.15, 0, 5, sides=6), "pole")
    mls.write(DATA / "mls_street.obj")

    # ALS: gently undulating terrain raster.
    ncols, nrows, cell = 101, 101, 2.0
    xll, yll = -100.0, -100.0
    grid = [f"ncols {ncols}", f"nrows {nrows}", f"xllcorner {xll}", f"yllcorner {yll}",
            f"cellsize {cell}", "NODATA_value -9999"]
    for r in range(nrows):
        y = yll + (nrows - r - 0.5) * cell
        z = [5 * math.sin((xll + (c + 0.5) * cell) / 30) * math.cos(y / 40) + 0.02 * (xll + (c + 0.5) * cell)
             for c in range(ncols)]
        grid.append(" ".join(f"{v:.3f}" for v in z))
    write("als_terrain.asc", "\n".join(grid) + "\n")

    write("scanners.xml", """
<document>
  <scanner id="tls" name="Panorama TLS" optics="rotating" pulseFreq_hz="20000" scanFreq_hz="40"
           scanAngleMax_deg="50" beamDivergence_rad="0.0003" wavelength_nm="1550" pulseLength_ns="3"
           peakPower_w="4" accuracy_m="0.003" receiverDiameter_m="0.05" atmosphericEfficiency="0.9"
           maxNOR="4" beamSampleQuality="2"/>
  <scanner id="als" name="Oscillating ALS" optics="oscillating" pulseFreq_hz="25000" scanFreq_hz="40"
           scanAngleMax_deg="20" beamDivergence_rad="0.00025" wavelength_nm="1064" pulseLength_ns="4"
           peakPower_w="4" accuracy_m="0.02" receiverDiameter_m="0.15" atmosphericEfficiency="0.9"
           maxNOR="5" beamSampleQuality="3"/>
  <scanner id="mls" name="Profiler MLS" optics="rotating" pulseFreq_hz="100000" scanFreq_hz="100"
           scanAngleMax_deg="80" beamDivergence_rad="0.0005" wavelength_nm="905" pulseLength_ns="4"
           peakPower_w="4" accuracy_m="0.01" receiverDiameter_m="0.05" atmosphericEfficiency="0.9"
           maxNOR="3" beamSampleQuality="1"/>
  <scanner id="palmer" name="Conic UAV" optics="palmer" pulseFreq_hz="50000" scanFreq_hz="10"
           palmerOffNadir_deg="20" beamDivergence_rad="0.0005" wavelength_nm="905" pulseLength_ns="4"
           peakPower_w="4" accuracy_m="0.02" receiverDiameter_m="0.05" atmosphericEfficiency="0.9"
           beamSampleQuality="2"/>
</document>
""")

    write("platforms.xml", """
<document>
  <platform id="tripod" type="static">
    <scannerMount z="1.5" roll_deg="90"/>
  </platform>
  <platform id="copter" type="multicopter" maxAccel_m_s2="2" bankLimit_deg="25" turnMode="smooth"/>
  <platform id="car" type="groundVehicle" maxTurnRadius_m="6" maxAccel_m_s2="2" mountHeight_m="2">
    <scannerMount roll_deg="90"/>
  </platform>
</document>
""")

    write("scenes.xml", """
<document>
  <scene id="tls_tree" name="Tree on a plane">
    <part id="ground_trunk" type="obj" file="tls_ground_trunk.obj"/>
    <part id="crown" type="vox" file="tls_crown.vox" mode="transmissive" lad="erectophile">
      <material name="leaves" reflectance="0.4" classification="5"/>
    </part>
  </scene>
  <scene id="als_terrain" name="Undulating terrain">
    <part id="terrain" type="raster" file="als_terrain.asc">
      <material name="soil" reflectance="0.3" isGround="true" classification="2"/>
    </part>
  </scene>
  <scene id="mls_street" name="Street with walls and poles">
    <part id="street" type="obj" file="mls_street.obj"/>
  </scene>
</document>
""")

    write("tls_tree.xml", """
<document>
  <survey name="tls_tree" scene="scenes.xml#tls_tree" platform="platforms.xml#tripod"
          scanner="scanners.xml#tls" seed="42" trajectoryInterval_s="0.5">
    <FWFSettings binWidth_ns="0.25" maxFullwaveRange_ns="100"/>
    <leg>
      <platformSettings x="0" y="0" z="0"/>
      <scannerSettings headRotatePerSec_deg="20" headRotateStart_deg="-20" headRotateStop_deg="20"/>
    </leg>
  </survey>
</document>
""")

    write("als_terrain.xml", """
<document>
  <survey name="als_terrain" scene="scenes.xml#als_terrain" platform="platforms.xml#copter"
          scanner="scanners.xml#als" trajectoryInterval_s="0.1">
    <FWFSettings binWidth_ns="0.25" maxFullwaveRange_ns="150"/>
    <platformSettings z="60" speed_m_s="10"/>
    <leg><platformSettings x="-80" y="-20"/></leg>
    <leg>
      <platformSettings x="80" y="-20"/>
      <scannerSettings active="false"/>
    </leg>
    <leg><platformSettings x="80" y="20"/></leg>
    <leg><platformSettings x="-80" y="20"/></leg>
  </survey>
</document>
""")

    write("mls_street.xml", """
<document>
  <survey name="mls_street" scene="scenes.xml#mls_street" platform="platforms.xml#car"
          scanner="scanners.xml#mls" seed="7" trajectoryInterval_s="0.1">
    <FWFSettings binWidth_ns="0.5" maxFullwaveRange_ns="60"/>
    <platformSettings speed_m_s="10"/>
    <leg><platformSettings x="-35" y="0"/></leg>
    <leg><platformSettings x="35" y="0"/></leg>
  </survey>
</document>
""")


if __name__ == "__main__":
    main()
