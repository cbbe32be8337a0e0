import { doubleFreeClient } from '../clients';

process.exit(doubleFreeClient());
