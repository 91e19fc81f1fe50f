#pragma once

#include "phaselab/bell.hpp"
#include "phaselab/error.hpp"
#include "phaselab/io.hpp"
#include "phaselab/kop.hpp"
#include "phaselab/marginal.hpp"
#include "phaselab/parallel.hpp"
#include "phaselab/quad.hpp"
#include "phaselab/quantum.hpp"
#include "phaselab/reconstruct.hpp"
#include "phaselab/reproduce.hpp"
#include "phaselab/spin.hpp"
#include "phaselab/wavefunction.hpp"
