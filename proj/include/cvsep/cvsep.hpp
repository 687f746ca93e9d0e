#pragma once

#include "cvsep/linalg.hpp"
#include "cvsep/symplectic.hpp"
#include "cvsep/polynomial.hpp"
#include "cvsep/wigner.hpp"
#include "cvsep/threshold.hpp"
#include "cvsep/gaussianity.hpp"
#include "cvsep/detector.hpp"
