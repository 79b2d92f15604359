#include "edgeplace/fixtures.hpp"

namespace edgeplace {

namespace {

constexpr std::string_view kToy4 = R"({
  "nodes": [
    {"id": "B1", "kind": "bs", "region": "west"},
    {"id": "B2", "kind": "bs", "region": "east"},
    {"id": "B3", "kind": "bs", "region": "west"},
    {"id": "E1", "kind": "edge", "region": "west", "has_gpu": true,
     "capacity": {"cpu": 4, "mem_gb": 4, "storage_gb": 20}, "unit_cost": {"cpu": 1.0, "storage": 0.1}},
    {"id": "E2", "kind": "edge", "region": "west", "has_gpu": false,
     "capacity": {"cpu": 4, "mem_gb": 4, "storage_gb": 20}, "unit_cost": {"cpu": 1.0, "storage": 0.1}},
    {"id": "E3", "kind": "edge", "region": "east", "has_gpu": false,
     "capacity": {"cpu": 2, "mem_gb": 2, "storage_gb": 10}, "unit_cost": {"cpu": 1.5, "storage": 0.1}},
    {"id": "E4", "kind": "edge", "region": "east", "has_gpu": true,
     "capacity": {"cpu": 8, "mem_gb": 8, "storage_gb": 40}, "unit_cost": {"cpu": 2.0, "storage": 0.2}},
    {"id": "UE1", "kind": "ue", "region": "west"},
    {"id": "UE2", "kind": "ue", "region": "east"},
    {"id": "UE3", "kind": "ue", "region": "west"}
  ],
  "links": [
    {"src": "B1", "dst": "E1", "latency_ms": 0.05},
    {"src": "B1", "dst": "E4", "latency_ms": 0.10},
    {"src": "B2", "dst": "E1", "latency_ms": 0.10},
    {"src": "B2", "dst": "E4", "latency_ms": 0.05},
    {"src": "B3", "dst": "E2", "latency_ms": 0.20},
    {"src": "E1", "dst": "E2", "latency_ms": 0.10},
    {"src": "E2", "dst": "E3", "latency_ms": 0.10},
    {"src": "E1", "dst": "E4", "latency_ms": 0.15}
  ],
  "attachments": [
    {"ue": "UE1", "bs": "B1"},
    {"ue": "UE2", "bs": "B2"},
    {"ue": "UE3", "bs": "B3"}
  ]
})";

constexpr std::string_view kDrone = R"({
  "nodes": [
    {"id": "B1", "kind": "bs", "region": "west"},
    {"id": "B2", "kind": "bs", "region": "west"},
    {"id": "B3", "kind": "bs", "region": "west"},
    {"id": "B4", "kind": "bs", "region": "east"},
    {"id": "B5", "kind": "bs", "region": "east"},
    {"id": "B6", "kind": "bs", "region": "east"},
    {"id": "U1", "kind": "upf", "region": "west"},
    {"id": "U2", "kind": "upf", "region": "east"},
    {"id": "E1", "kind": "edge", "region": "west", "has_gpu": true,
     "capacity": {"cpu": 20, "mem_gb": 20, "storage_gb": 100}, "unit_cost": {"cpu": 1.7, "storage": 0.17}},
    {"id": "E2", "kind": "edge", "region": "east", "has_gpu": true,
     "capacity": {"cpu": 20, "mem_gb": 20, "storage_gb": 100}, "unit_cost": {"cpu": 2.4, "storage": 0.24}},
    {"id": "E3", "kind": "edge", "region": "east", "has_gpu": false,
     "capacity": {"cpu": 6, "mem_gb": 6, "storage_gb": 30}, "unit_cost": {"cpu": 1.5, "storage": 0.15}},
    {"id": "E4", "kind": "edge", "region": "east", "has_gpu": true,
     "capacity": {"cpu": 40, "mem_gb": 40, "storage_gb": 200}, "unit_cost": {"cpu": 11.7, "storage": 1.17}},
    {"id": "UE1", "kind": "ue", "region": "west"},
    {"id": "UE2", "kind": "ue", "region": "west"},
    {"id": "UE3", "kind": "ue", "region": "west"},
    {"id": "UE4", "kind": "ue", "region": "west"},
    {"id": "UE5", "kind": "ue", "region": "west"},
    {"id": "UE6", "kind": "ue", "region": "west"},
    {"id": "UE7", "kind": "ue", "region": "east"},
    {"id": "UE8", "kind": "ue", "region": "east"},
    {"id": "UE9", "kind": "ue", "region": "east"},
    {"id": "UE10", "kind": "ue", "region": "east"},
    {"id": "UE11", "kind": "ue", "region": "east"},
    {"id": "UE12", "kind": "ue", "region": "east"}
  ],
  "links": [
    {"src": "B1", "dst": "U1", "latency_ms": 0.013},
    {"src": "B2", "dst": "U1", "latency_ms": 0.017},
    {"src": "B3", "dst": "U1", "latency_ms": 0.015},
    {"src": "B4", "dst": "U2", "latency_ms": 0.025},
    {"src": "B5", "dst": "U2", "latency_ms": 0.019},
    {"src": "B6", "dst": "U2", "latency_ms": 0.043},
    {"src": "U1", "dst": "E1", "latency_ms": 0.096},
    {"src": "U2", "dst": "E2", "latency_ms": 0.098},
    {"src": "U2", "dst": "E3", "latency_ms": 0.138},
    {"src": "E1", "dst": "E2", "latency_ms": 0.115},
    {"src": "B1", "dst": "E4", "latency_ms": 0.021},
    {"src": "B2", "dst": "E4", "latency_ms": 0.021},
    {"src": "B3", "dst": "E4", "latency_ms": 0.021},
    {"src": "B4", "dst": "E4", "latency_ms": 0.016},
    {"src": "B5", "dst": "E4", "latency_ms": 0.018},
    {"src": "B6", "dst": "E4", "latency_ms": 0.018}
  ],
  "attachments": [
    {"ue": "UE1", "bs": "B1"}, {"ue": "UE2", "bs": "B1"},
    {"ue": "UE3", "bs": "B2"}, {"ue": "UE4", "bs": "B2"},
    {"ue": "UE5", "bs": "B3"}, {"ue": "UE6", "bs": "B3"},
    {"ue": "UE7", "bs": "B4"}, {"ue": "UE8", "bs": "B4"},
    {"ue": "UE9", "bs": "B5"}, {"ue": "UE10", "bs": "B5"},
    {"ue": "UE11", "bs": "B6"}, {"ue": "UE12", "bs": "B6"}
  ]
})";

}  // namespace

std::string_view toy4_topology_text() { return kToy4; }
NetworkGraph toy4_topology() { return parse_topology(kToy4); }

std::string_view drone_topology_text() { return kDrone; }
NetworkGraph drone_topology() { return parse_topology(kDrone); }

}  // namespace edgeplace
