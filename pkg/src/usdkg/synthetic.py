"""Synthetic apartment-like scenes for throughput checks.

Layout, with ``R`` rooms, ``F`` furniture pieces and ``D`` doors per room::

    /apartment                          Xform
        /room_r                         Xform, xformOp:translate
            /furniture_f                Xform + PhysicsMassAPI, translate and mass
                /geom                   Cube, size
            /door_d                     Xform, translate
                /geom                   Cube, size
            /door_d_joint               PhysicsRevoluteJoint + JointStateAPI

Each door joint links its room (body0) to its door (body1). Even-numbered
joints sit at 0.0 and odd-numbered ones at 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ApartmentShape:
    rooms: int
    furniture: int
    doors: int

    @property
    def xforms(self) -> int:
        return 1 + self.rooms * (1 + self.furniture + self.doors)

    @property
    def cubes(self) -> int:
        return self.rooms * (self.furniture + self.doors)

    @property
    def joints(self) -> int:
        return self.rooms * self.doors

    @property
    def prims(self) -> int:
        return self.xforms + self.cubes + self.joints


def joint_value(door: int) -> float:
    return 0.0 if door % 2 == 0 else 0.5


def apartment_usda(shape: ApartmentShape) -> str:
    """usda text of the apartment described by ``shape``."""
    out = ["#usda 1.0", "", 'def Xform "apartment" {']
    for r in range(shape.rooms):
        out += [f'    def Xform "room_{r}" {{',
                f"        float3 xformOp:translate = ({r * 5}, 0, 0)"]
        for f in range(shape.furniture):
            out += [f'        def Xform "furniture_{f}" (',
                    '            prepend apiSchemas = ["PhysicsMassAPI"]',
                    "        ) {",
                    f"            float3 xformOp:translate = ({f % 4}, {f // 4}, 0)",
                    f"            float physics:mass = {1 + f % 7}.5",
                    '            def Cube "geom" {',
                    f"                double size = {0.25 + 0.05 * (f % 5):.2f}",
                    "            }",
                    "        }"]
        for d in range(shape.doors):
            out += [f'        def Xform "door_{d}" {{',
                    f"            float3 xformOp:translate = ({d}, -1, 0)",
                    '            def Cube "geom" {',
                    "                double size = 0.9",
                    "            }",
                    "        }",
                    f'        def PhysicsRevoluteJoint "door_{d}_joint" (',
                    '            prepend apiSchemas = ["JointStateAPI"]',
                    "        ) {",
                    f"            rel physics:body0 = </apartment/room_{r}>",
                    f"            rel physics:body1 = </apartment/room_{r}/door_{d}>",
                    '            uniform token physics:axis = "Z"',
                    f"            float jointState:value = {joint_value(d)}",
                    "        }"]
        out.append("    }")
    out.append("}")
    return "\n".join(out) + "\n"
