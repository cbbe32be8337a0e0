import { uafClient } from '../clients';

process.exit(uafClient());
