#pragma once

#include "vsq/boson_algebra.hpp"
#include "vsq/config.hpp"
#include "vsq/determinants.hpp"
#include "vsq/entanglement.hpp"
#include "vsq/entropy.hpp"
#include "vsq/error.hpp"
#include "vsq/fixtures.hpp"
#include "vsq/hooks.hpp"
#include "vsq/linalg.hpp"
#include "vsq/model.hpp"
#include "vsq/oracle.hpp"
#include "vsq/runner.hpp"
#include "vsq/scf.hpp"
#include "vsq/transforms.hpp"
#include "vsq/verify.hpp"
