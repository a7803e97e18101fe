#ifndef PHIQ_PHIQ_HPP
#define PHIQ_PHIQ_HPP

#include "phiq/bahadur.hpp"
#include "phiq/bounds.hpp"
#include "phiq/empirical.hpp"
#include "phiq/experiment.hpp"
#include "phiq/marginal.hpp"
#include "phiq/mixing.hpp"
#include "phiq/process.hpp"
#include "phiq/rate_fit.hpp"
#include "phiq/report.hpp"
#include "phiq/var.hpp"

#endif  // PHIQ_PHIQ_HPP
