#pragma once

#include "sind/error.hpp"
#include "sind/linalg.hpp"
#include "sind/rng.hpp"
#include "sind/bundle.hpp"
#include "sind/indicator.hpp"
#include "sind/voting.hpp"
#include "sind/oracle.hpp"
#include "sind/reprio.hpp"
#include "sind/pipeline.hpp"
#include "sind/synth.hpp"
