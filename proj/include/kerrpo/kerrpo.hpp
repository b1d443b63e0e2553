#pragma once

#include "kerrpo/errors.hpp"
#include "kerrpo/model.hpp"
#include "kerrpo/ode.hpp"
#include "kerrpo/wei_norman.hpp"
#include "kerrpo/fock.hpp"
#include "kerrpo/state_analysis.hpp"
#include "kerrpo/oracle.hpp"
