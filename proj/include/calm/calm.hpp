#pragma once

#include "calm/error.hpp"
#include "calm/decimal.hpp"
#include "calm/date.hpp"
#include "calm/bucket.hpp"
#include "calm/balance_sheet.hpp"
#include "calm/crypto_mc.hpp"
#include "calm/capital_risk.hpp"
#include "calm/liquidity.hpp"
#include "calm/ingestion.hpp"
#include "calm/report.hpp"
