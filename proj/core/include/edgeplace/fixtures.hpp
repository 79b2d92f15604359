#pragma once

#include <string_view>

#include "edgeplace/topology.hpp"

namespace edgeplace {

/// Four edge sites (E1-E4), three base stations (B1-B3). Small enough to check
/// every latency by hand.
std::string_view toy4_topology_text();
NetworkGraph toy4_topology();

/// Topology shipped with the drone application: six base stations behind two
/// UPFs and four edge sites, one of them a well-connected but expensive hub.
std::string_view drone_topology_text();
NetworkGraph drone_topology();

}  // namespace edgeplace
