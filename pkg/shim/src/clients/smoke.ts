import { smokeClient } from '../clients';

process.exit(smokeClient());
