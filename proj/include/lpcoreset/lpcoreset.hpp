#ifndef LPCORESET_LPCORESET_HPP
#define LPCORESET_LPCORESET_HPP

// Everything except the CLI front end (cli.hpp, which needs CLI11).
#include "lpcoreset/adversarial.hpp"
#include "lpcoreset/coresets.hpp"
#include "lpcoreset/embedding.hpp"
#include "lpcoreset/errors.hpp"
#include "lpcoreset/experiment.hpp"
#include "lpcoreset/lewis.hpp"
#include "lpcoreset/matrix_io.hpp"
#include "lpcoreset/power_means.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/sampler.hpp"
#include "lpcoreset/solver.hpp"
#include "lpcoreset/subspace.hpp"
#include "lpcoreset/synthetic.hpp"
#include "lpcoreset/tensor_core.hpp"
#include "lpcoreset/verify.hpp"

#endif
