#pragma once

#include "bigint.hpp"
#include "modular.hpp"
#include "primes.hpp"
#include "factorization.hpp"
#include "abundancy.hpp"
#include "order_theory.hpp"
#include "conditions.hpp"
#include "chains.hpp"
#include "config.hpp"
#include "report_io.hpp"
