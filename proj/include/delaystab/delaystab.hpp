#pragma once

#include "delaystab/rational.hpp"
#include "delaystab/polynomial.hpp"
#include "delaystab/matrix.hpp"
#include "delaystab/sign.hpp"
#include "delaystab/exact_linalg.hpp"
#include "delaystab/network.hpp"
#include "delaystab/parser.hpp"
#include "delaystab/params.hpp"
#include "delaystab/jacobians.hpp"
#include "delaystab/certificates.hpp"
#include "delaystab/characteristic.hpp"
#include "delaystab/equilibria.hpp"
#include "delaystab/dde.hpp"
#include "delaystab/roots.hpp"
#include "delaystab/report.hpp"
