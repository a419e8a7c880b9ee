#ifndef FREDHIER_FREDHIER_HPP
#define FREDHIER_FREDHIER_HPP

#include "error.hpp"
#include "quadrature.hpp"
#include "specfn.hpp"
#include "operator.hpp"
#include "hierarchy.hpp"
#include "tau.hpp"
#include "pii.hpp"
#include "zs.hpp"
#include "kpz.hpp"
#include "parallel.hpp"

#endif
