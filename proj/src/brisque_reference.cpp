#include "pdanet/quality_metrics.hpp"

namespace pdanet::metrics {

namespace {

// Reference coefficients, generated by `pdanet brisque-model --calibrate`.
// Anchors are corpus-mean feature vectors (expressed in [-1,1] scaled
// space) of seeded clean simulated LDOS corpora at 64 and 128 px and of the
// same corpora under graded degradation: a pure-blur ladder (sigma 0, 0.75,
// 1.5, 2.5, 3.5 px mapped to scores 20..68) and a combined
// blur/noise/line/shear ladder (scores 35..80). Alphas come from a
// ridge-regularized kernel solve against those targets with the far field
// pinned at 85, so statistics outside the calibrated family read as heavily
// distorted. Scores are comparable only within one model file.

constexpr std::array<double, 36> kFeatMin = {
    -1.876251, -0.1679688027, -0.036751, -0.1165584821,
    -0.1230462361, -0.122228524, -0.021751, -0.3344755415,
    -0.15984907, -0.08361400602, -0.069751, -0.2596327879,
    -0.1623366808, -0.09772217924, -0.035251, -0.2520742245,
    -0.1611518233, -0.09582294498, -1.877501, -0.1445904129,
    -0.069251, -0.1824270051, -0.1181819688, -0.1274879424,
    -0.028501, -0.3441706066, -0.1651516349, -0.0944030477,
    -0.081751, -0.4671410287, -0.1832300312, -0.08542056127,
    -0.065251, -0.4374462984, -0.1833831774, -0.08311656599,
    };
constexpr std::array<double, 36> kFeatMax = {
    12.375251, 0.9276844693, 1.815751, 0.3685138012,
    0.6158686069, 0.6159855577, 1.770751, 0.4341999776,
    0.7998760882, 0.4223281625, 1.986751, 0.2281589263,
    0.8133300728, 0.4928160508, 1.880251, 0.2437109223,
    0.807614926, 0.4833268333, 12.375501, 0.900426383,
    1.918251, 0.393965803, 0.5921911924, 0.6710604179,
    1.774501, 0.419703935, 0.8268389221, 0.5070259098,
    2.040751, 0.3047098142, 0.9185898004, 0.4503697721,
    2.024251, 0.2684660674, 0.9190945092, 0.4407375845,
    };
constexpr std::array<std::array<double, 36>, 18> kAnchors = {{
  {0.1412131858, 0.0743558209, 0.4795676334, 0.6004800153,
   -0.5982125246, 0.06630066135, 0.4923843879, 0.5899691614,
   -0.6158942836, 0.421092225, 0.4833936461, 0.5724644438,
   -0.5126362761, -0.02132164602, 0.547741532, 0.535067926,
   -0.5138264045, 0.002295445148, -0.1825089199, 0.5196495246,
   0.1996475978, -0.4774229566, 0.4286021565, 0.1635522336,
   0.2569603362, -0.1689091601, 0.1176852296, 0.4581726972,
   0.07835092735, -0.3730606394, 0.435092834, 0.1303136231,
   0.07461107958, -0.3755788767, 0.4394592828, 0.18963894,
   },
  {0.01966810235, -0.02395513639, 0.3858025524, 0.5039440041,
   -0.621784638, -0.08566966314, 0.4056899239, 0.5235658032,
   -0.6329595999, 0.1913222009, 0.4163866605, 0.5688377712,
   -0.5583634524, -0.1450212609, 0.4840506562, 0.5234026656,
   -0.5586139761, -0.1297872202, -0.249898232, 0.3780703868,
   0.1113961143, -0.3561196753, 0.1394371911, 0.05180888805,
   0.1651689793, -0.08051295606, -0.08953248307, 0.3005598117,
   0.02138985028, -0.2762495515, 0.1758506295, -0.03317682224,
   0.01880830935, -0.2698422765, 0.173667651, 0.009856128976,
   },
  {-0.3028522888, -0.354643807, -0.002968957658, 0.003615523562,
   -0.6536693385, -0.4913913529, 0.003905156033, 0.2029501016,
   -0.6570348941, -0.4094110556, 0.0009238989313, 0.3722107574,
   -0.6403620704, -0.501928654, 0.04688066105, 0.3147988718,
   -0.6398075651, -0.5005217637, -0.4610186682, -0.1334035007,
   -0.2641506776, -0.06578447834, -0.5108948033, -0.3241870306,
   -0.2399331781, 0.141189269, -0.5556119843, -0.1975689833,
   -0.2438631389, 0.09648440089, -0.4771958701, -0.4372393449,
   -0.243598714, 0.1235659087, -0.4799077435, -0.4294352317,
   },
  {-0.5529171592, -0.6226045935, -0.4863152644, -0.4302902354,
   -0.6643354542, -0.6539988713, -0.4820078304, -0.07340574347,
   -0.6649174689, -0.6481120893, -0.4821293634, 0.1471105803,
   -0.6654979441, -0.6533599019, -0.4812837575, 0.09979294205,
   -0.665602016, -0.652864977, -0.5647371691, -0.5389575018,
   -0.5052573532, -0.1306148545, -0.6628749948, -0.6009467094,
   -0.500665002, 0.07534538718, -0.663445142, -0.5826794267,
   -0.4760890685, 0.3100379426, -0.6594719003, -0.6094855547,
   -0.4801144005, 0.356359021, -0.660167878, -0.6076374799,
   },
  {-0.5706977412, -0.6492392264, -0.3960049706, -0.5024133411,
   -0.664452145, -0.6649559866, -0.3885630253, -0.1193325253,
   -0.6649499991, -0.663860472, -0.4117671658, 0.08479427922,
   -0.6656856169, -0.6645533819, -0.4051679403, 0.03642615279,
   -0.6657169144, -0.6645027931, -0.5754577176, -0.6293543882,
   -0.5069177289, -0.233421994, -0.6663692425, -0.6567891449,
   -0.5018297262, -0.0004888705216, -0.6662417801, -0.6550031306,
   -0.4914483002, 0.2886420635, -0.6663032592, -0.6548244893,
   -0.5032299562, 0.3272596303, -0.6663011539, -0.6552412576,
   },
  {-0.1996842157, 0.04881140831, 0.2985151973, 0.2562972592,
   -0.5340924582, -0.05271304149, 0.3090094181, 0.3633521615,
   -0.5631602428, 0.2457776846, 0.1953316846, 0.4391420946,
   -0.4863725617, -0.06756593547, 0.2539282131, 0.4082776296,
   -0.4917641787, -0.04888119044, -0.26440044, 0.3860090608,
   0.09252820878, -0.3661021041, 0.159530321, 0.0581975848,
   0.1526343287, -0.09975494694, -0.06654920034, 0.3022600315,
   0.01521788908, -0.2694285025, 0.1706639688, -0.02948294939,
   0.01603252832, -0.2666690476, 0.1714207501, 0.01129625548,
   },
  {-0.3152790492, 0.3798001649, 0.1598378841, -0.04870589309,
   -0.1221271574, 0.3330284127, 0.1483959293, -0.4560594458,
   0.1490686687, 0.1255298934, 0.0229515945, -0.3788275908,
   0.1258747841, 0.07267519582, 0.05377180499, -0.4066463359,
   0.1309653782, 0.1005516069, -0.3180031828, 0.2747815514,
   0.1181885603, 0.2821638855, -0.3615851288, 0.1917191666,
   0.1001108152, -0.3067379155, -0.07758795564, -0.07818429087,
   0.03203766121, -0.1324772488, -0.09874399053, -0.1625810714,
   0.04058383289, -0.1249159765, -0.1092302808, -0.1503319306,
   },
  {-0.2925375866, 0.5614369667, 0.1948715845, -0.2309320071,
   0.206983769, 0.530899904, 0.196875652, -0.5282519517,
   0.4331028243, 0.3687680171, 0.04512516885, -0.4591290048,
   0.4179663599, 0.3458750294, 0.0856172429, -0.5242385855,
   0.4417768956, 0.3507884962, -0.2729530242, 0.4576740771,
   0.1819872383, 0.1505542284, -0.1213583676, 0.360281084,
   0.2283968626, -0.5169710012, 0.2002622712, -0.05892949717,
   0.05639570658, -0.1618814516, 0.1260527509, 0.1087534398,
   0.05853069296, -0.1637127128, 0.1219405702, 0.126037911,
   },
  {-0.3123670754, 0.6427834454, 0.1570308696, -0.5355247998,
   0.5375731099, 0.5163915536, 0.1676985577, -0.5089515843,
   0.5583483356, 0.5787014278, 0.01804034229, -0.4079380134,
   0.5362921144, 0.5589561255, 0.05857472349, -0.4325894549,
   0.5323356069, 0.5902115094, -0.2925839763, 0.5988220036,
   0.1226162288, -0.1426582933, 0.2814511299, 0.4451887403,
   0.1890735562, -0.4871914906, 0.3939656781, 0.2048579065,
   0.02497053006, -0.111899024, 0.2848722073, 0.4409378284,
   0.03082074102, -0.1241210736, 0.2866806246, 0.4488403855,
   },
  {-0.3777917584, -0.4089132449, -0.06855593138, 0.03170455841,
   -0.6644527505, -0.5258321212, -0.05589951922, 0.2186358416,
   -0.6650201933, -0.4609775821, -0.04604906779, 0.5369566118,
   -0.6638163084, -0.5227201225, -0.01320802589, 0.4789596178,
   -0.6638397261, -0.5209239056, 0.1341471783, 0.07688600273,
   0.3968801038, 0.5847324993, -0.5994773328, -0.0001257742934,
   0.5047692681, 0.6170583214, -0.617789286, 0.2141440456,
   0.45012914, 0.5494043528, -0.5377498445, 0.03679694679,
   0.4642733053, 0.588742553, -0.5334744652, 0.03397809937,
   },
  {-0.3622565537, -0.4259310825, -0.09781365958, 0.03370458667,
   -0.666360784, -0.5409802913, -0.08580185685, 0.219763735,
   -0.6664667453, -0.483426827, -0.09856542809, 0.5601825015,
   -0.6661295615, -0.5312659121, -0.06786732669, 0.5012057876,
   -0.6661486986, -0.5295839607, 0.1085595863, 0.05298599334,
   0.3787669144, 0.5715308532, -0.6073192794, -0.03455159307,
   0.4849689573, 0.6062959546, -0.6231222111, 0.169000775,
   0.4446167777, 0.5518232803, -0.5491236257, 0.002435473679,
   0.459822484, 0.592028683, -0.5451375347, -0.0002691395288,
   },
  {-0.3767462545, -0.459725788, -0.1366260333, -0.03355306034,
   -0.6665567016, -0.5682856739, -0.1239050221, 0.1767297005,
   -0.6665835038, -0.5230659813, -0.1434474656, 0.5051198115,
   -0.6664888639, -0.558744382, -0.1166795963, 0.4481460612,
   -0.6665302438, -0.5571784885, 0.02299164765, -0.02051963292,
   0.3136600617, 0.4994637258, -0.6212984864, -0.1383237857,
   0.4123678177, 0.5516826506, -0.6331630466, 0.03192072498,
   0.3886922132, 0.5363107857, -0.5743357485, -0.1060915063,
   0.4039718555, 0.5807252867, -0.5717401227, -0.1058203468,
   },
  {-0.4134160736, -0.5347553176, -0.2018891208, -0.2095832828,
   -0.6662679069, -0.6199494505, -0.1893442797, 0.06502875037,
   -0.6663375293, -0.598419939, -0.2106975826, 0.3471010505,
   -0.6664294494, -0.6148948602, -0.1882535231, 0.2937402295,
   -0.6664788838, -0.614089253, -0.1809162729, -0.2263600284,
   0.1205030234, 0.257178303, -0.6443214569, -0.3863162074,
   0.1940097682, 0.3713436035, -0.6503092663, -0.2954061,
   0.179693588, 0.4599195639, -0.6220751946, -0.3678526518,
   0.1821965234, 0.5067230206, -0.621227312, -0.3647493697,
   },
  {-0.4414411898, -0.6124929905, -0.2874490824, -0.4192749923,
   -0.6648127742, -0.6562413423, -0.278604989, -0.0669880461,
   -0.6652082846, -0.6511459227, -0.3017745667, 0.1606336204,
   -0.6657475614, -0.6547031154, -0.2867133524, 0.1117494469,
   -0.6658299287, -0.6544672677, -0.416747293, -0.5131930377,
   -0.2856349327, -0.08492638992, -0.6634004304, -0.6078762803,
   -0.2510812523, 0.1140604927, -0.6643265721, -0.5901275675,
   -0.2421199132, 0.3532431598, -0.6610213205, -0.601665783,
   -0.2462787784, 0.3928368624, -0.6607607368, -0.6020811268,
   },
  {-0.4360873682, -0.3017437021, -0.1141699172, -0.2157206316,
   -0.6019002699, -0.4803254675, -0.1033192711, 0.0619644631,
   -0.6164502906, -0.3934793854, -0.1582298485, 0.3599890101,
   -0.6216235315, -0.4489549966, -0.1375618506, 0.3020585859,
   -0.6202909007, -0.4445920437, 0.004441169657, 0.06593542711,
   0.365735481, 0.5324385366, -0.5936862608, -0.03212500907,
   0.4653904987, 0.5775205379, -0.6129615451, 0.176761059,
   0.3854884471, 0.5363224049, -0.538916602, 0.01569037633,
   0.3942087636, 0.5790806257, -0.5347105131, 0.01914859096,
   },
  {-0.3767602881, 0.2227183427, 0.03821858222, -0.03446531943,
   -0.2798037468, 0.1430520275, 0.02839606316, -0.3882523763,
   -0.04925371071, -0.03824412723, -0.07921217679, -0.2771883059,
   -0.07083964932, -0.07988857982, -0.04677624978, -0.3260546808,
   -0.06479240793, -0.07271384199, -0.2688486257, 0.1794307003,
   0.1447042569, 0.4757939392, -0.5024397755, 0.1592029093,
   0.2132554484, 0.02674700069, -0.3506219975, 0.02262213854,
   0.06680794647, 0.1766928855, -0.3166177076, -0.02112861966,
   0.06360367207, 0.1950960481, -0.3128994133, -0.0114479481,
   },
  {-0.3129635038, 0.5200778225, 0.1579485474, -0.2391105734,
   0.1619417623, 0.4706919894, 0.1578240917, -0.5184194791,
   0.3868031266, 0.3212059704, 0.01779721099, -0.4235577172,
   0.3532646487, 0.3046660904, 0.05424165571, -0.4564596349,
   0.3589998755, 0.3303674581, -0.2904019799, 0.3978397293,
   0.1448048857, 0.1586879434, -0.1710143718, 0.3152169199,
   0.1860230882, -0.4036954273, 0.09456217895, -0.00923520249,
   0.03929324919, -0.06835643323, 0.01941392596, 0.119967547,
   0.0316821903, -0.0859742291, 0.03352088982, 0.1227523719,
   },
  {-0.3132231255, 0.6374457162, 0.1456408684, -0.4983930414,
   0.5194951656, 0.5443203212, 0.157489364, -0.5043938882,
   0.5605997776, 0.5905629842, 0.01750545344, -0.3976502044,
   0.5258299071, 0.5601626537, 0.05753061077, -0.4355483097,
   0.5303123381, 0.582853856, -0.2965620857, 0.5719207569,
   0.1288552162, -0.1212993939, 0.2252837973, 0.4168063266,
   0.1860230882, -0.4944251988, 0.3764757452, 0.1716770594,
   0.02605415684, -0.1171707488, 0.2585876146, 0.3898263741,
   0.01809043495, -0.1108308703, 0.2602106451, 0.4310985132,
   },
}};
constexpr std::array<double, 18> kAlphas = {-202.3990891, 137.1718264, -105.1542216, -210.0625607, 101.6510729, 88.1646048, -107.185531, -40.97076896, 17.45365653, -320.3733714, 17.23645809, 209.7173147, 82.80774249, 110.5512558, -14.45404988, 71.89266265, 27.23368909, 46.89723195, };
constexpr double kGamma = 0.07329693119;

} // namespace

BrisqueModel reference_brisque_model() {
  BrisqueModel m;
  m.gamma = kGamma;
  m.rho = -85.0;
  m.feat_min = kFeatMin;
  m.feat_max = kFeatMax;
  m.alphas.assign(kAlphas.begin(), kAlphas.end());
  m.svs.assign(kAnchors.begin(), kAnchors.end());
  return m;
}

} // namespace pdanet::metrics
