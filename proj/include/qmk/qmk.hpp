#pragma once

// Quantum Monge-Kantorovich toolkit: transport distances between finite-rank
// density operators, the dual potential problem, optimality and transport
// structure diagnostics, and the discrete classical solver used for
// semiclassical comparisons.

#include "qmk/bipartite.hpp"
#include "qmk/classical.hpp"
#include "qmk/cost.hpp"
#include "qmk/fock.hpp"
#include "qmk/io.hpp"
#include "qmk/linalg.hpp"
#include "qmk/optimality.hpp"
#include "qmk/sdp.hpp"
#include "qmk/states.hpp"
