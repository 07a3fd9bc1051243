#pragma once

#include "logmq/convergence_model.hpp"
#include "logmq/errors.hpp"
#include "logmq/logm.hpp"
#include "logmq/matrix_io.hpp"
#include "logmq/oracle.hpp"
#include "logmq/quad_rules.hpp"
#include "logmq/spd_matrix.hpp"
#include "logmq/spectral.hpp"
