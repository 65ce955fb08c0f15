#pragma once

#include "sind/reprio/answer.hpp"
#include "sind/reprio/bundle_io.hpp"
#include "sind/reprio/manifest.hpp"
#include "sind/reprio/report.hpp"
